#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pathmark/error.hpp"

namespace pathmark {

struct Cell {
  std::string qualifier;
  std::string value;
};

/// All-or-nothing group of mutations.
class WriteBatch {
 public:
  struct Op {
    std::string row;
    std::string qualifier;
    std::optional<std::string> value;  // nullopt deletes the cell
  };

  void put(std::string row, std::string qualifier, std::string value) {
    ops_.push_back({std::move(row), std::move(qualifier), std::move(value)});
  }
  void erase(std::string row, std::string qualifier) {
    ops_.push_back({std::move(row), std::move(qualifier), std::nullopt});
  }

  const std::vector<Op>& ops() const { return ops_; }
  bool empty() const { return ops_.empty(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<Op> ops_;
};

/// Consistent read view of a store. Cells written after the snapshot was
/// taken are not visible through it.
class StoreSnapshot {
 public:
  virtual ~StoreSnapshot() = default;

  /// Reads the requested qualifiers of one row in a single round trip.
  /// An empty `qualifiers` list reads the whole row. Missing cells are
  /// absent from the result, which is ordered by qualifier.
  virtual std::vector<Cell> get(std::string_view row,
                                const std::vector<std::string>& qualifiers) = 0;

  /// Visits cells whose row starts with `row_prefix`, ordered by row then
  /// qualifier. The visitor returns false to stop.
  virtual void scan(std::string_view row_prefix,
                    const std::function<bool(std::string_view row, std::string_view qualifier,
                                             std::string_view value)>& visit) = 0;
};

/// Ordered map (row, qualifier) -> value with batched atomic writes and
/// snapshot reads.
class OrderedStore {
 public:
  virtual ~OrderedStore() = default;

  virtual std::unique_ptr<StoreSnapshot> snapshot() const = 0;
  virtual void write(const WriteBatch& batch) = 0;

  /// Number of `get` round trips served by snapshots of this store.
  std::uint64_t get_count() const { return gets_.load(std::memory_order_relaxed); }

 protected:
  void count_get() const { gets_.fetch_add(1, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> gets_{0};
};

/// In-process store. A snapshot shares the current map; a write made while
/// snapshots are open copies the map first.
class MemoryStore : public OrderedStore {
 public:
  std::unique_ptr<StoreSnapshot> snapshot() const override;
  void write(const WriteBatch& batch) override;

  std::size_t cell_count() const;

 private:
  friend class MemorySnapshot;
  using Key = std::pair<std::string, std::string>;
  using Map = std::map<Key, std::string, std::less<>>;
  std::shared_ptr<Map> cells_ = std::make_shared<Map>();
  mutable std::mutex mutex_;
};

/// Store backed by an SQLite database in WAL mode, one table ordered by
/// (row, qualifier). Each snapshot is a read transaction on its own
/// connection.
class SqliteStore : public OrderedStore {
 public:
  enum class Mode { read_only, read_write };

  SqliteStore(const std::filesystem::path& file, Mode mode);
  ~SqliteStore() override;
  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  std::unique_ptr<StoreSnapshot> snapshot() const override;
  void write(const WriteBatch& batch) override;

 private:
  friend class SqliteSnapshot;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pathmark

#include "pathmark/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <mutex>

namespace pathmark {

// ---------------------------------------------------------------------------
// MemoryStore

class MemorySnapshot : public StoreSnapshot {
 public:
  MemorySnapshot(const MemoryStore& store, std::shared_ptr<const MemoryStore::Map> cells)
      : store_(store), cells_(std::move(cells)) {}

  std::vector<Cell> get(std::string_view row, const std::vector<std::string>& qualifiers) override {
    store_.count_get();
    std::vector<Cell> out;
    if (qualifiers.empty()) {
      for (auto it = cells_->lower_bound(std::pair{std::string(row), std::string()});
           it != cells_->end() && it->first.first == row; ++it) {
        out.push_back({it->first.second, it->second});
      }
      return out;
    }
    std::vector<std::string> sorted = qualifiers;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const auto& q : sorted) {
      auto it = cells_->find(std::pair{std::string(row), q});
      if (it != cells_->end()) out.push_back({q, it->second});
    }
    return out;
  }

  void scan(std::string_view row_prefix,
            const std::function<bool(std::string_view, std::string_view, std::string_view)>& visit)
      override {
    for (auto it = cells_->lower_bound(std::pair{std::string(row_prefix), std::string()});
         it != cells_->end() && it->first.first.starts_with(row_prefix); ++it) {
      if (!visit(it->first.first, it->first.second, it->second)) return;
    }
  }

 private:
  const MemoryStore& store_;
  std::shared_ptr<const MemoryStore::Map> cells_;
};

std::unique_ptr<StoreSnapshot> MemoryStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return std::make_unique<MemorySnapshot>(*this, cells_);
}

void MemoryStore::write(const WriteBatch& batch) {
  std::lock_guard lock(mutex_);
  // New snapshots are only taken under the lock, so a use count of one means
  // no reader can observe the mutation.
  if (cells_.use_count() > 1) cells_ = std::make_shared<Map>(*cells_);
  for (const auto& op : batch.ops()) {
    Key key{op.row, op.qualifier};
    if (op.value) {
      cells_->insert_or_assign(std::move(key), *op.value);
    } else {
      cells_->erase(key);
    }
  }
}

std::size_t MemoryStore::cell_count() const {
  std::lock_guard lock(mutex_);
  return cells_->size();
}

// ---------------------------------------------------------------------------
// SqliteStore

namespace {

void check(int rc, sqlite3* db, const char* what) {
  if (rc != SQLITE_OK && rc != SQLITE_DONE && rc != SQLITE_ROW) {
    throw StorageError(std::string(what) + ": " + (db != nullptr ? sqlite3_errmsg(db) : sqlite3_errstr(rc)));
  }
}

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  int rc = sqlite3_exec(db, sql, nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err != nullptr ? err : sqlite3_errstr(rc);
    sqlite3_free(err);
    throw StorageError(std::string(sql) + ": " + msg);
  }
}

struct Statement {
  sqlite3_stmt* stmt = nullptr;
  Statement(sqlite3* db, std::string_view sql) {
    check(sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt, nullptr), db,
          "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void bind(int i, std::string_view blob) {
    sqlite3_bind_blob(stmt, i, blob.data(), static_cast<int>(blob.size()), SQLITE_TRANSIENT);
  }
  static std::string_view column(sqlite3_stmt* s, int i) {
    const void* p = sqlite3_column_blob(s, i);
    int n = sqlite3_column_bytes(s, i);
    return p == nullptr ? std::string_view{} : std::string_view(static_cast<const char*>(p), static_cast<std::size_t>(n));
  }
};

struct Connection {
  sqlite3* db = nullptr;
  Connection(const std::filesystem::path& file, int flags) {
    int rc = sqlite3_open_v2(file.string().c_str(), &db, flags | SQLITE_OPEN_NOMUTEX, nullptr);
    if (rc != SQLITE_OK) {
      std::string msg = db != nullptr ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
      sqlite3_close(db);
      throw StorageError("cannot open store " + file.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db, 10000);
  }
  ~Connection() { sqlite3_close(db); }
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
};

// Smallest string greater than every string starting with `prefix`, or empty
// if there is none.
std::string prefix_successor(std::string_view prefix) {
  std::string s(prefix);
  while (!s.empty()) {
    auto& c = reinterpret_cast<unsigned char&>(s.back());
    if (c != 0xff) {
      ++c;
      return s;
    }
    s.pop_back();
  }
  return s;
}

constexpr std::size_t kMaxInList = 500;

}  // namespace

struct SqliteStore::Impl {
  std::filesystem::path file;
  Mode mode;
  std::unique_ptr<Connection> writer;
  std::mutex write_mutex;
  std::mutex pool_mutex;
  std::vector<std::unique_ptr<Connection>> idle;

  std::unique_ptr<Connection> acquire() {
    {
      std::lock_guard lock(pool_mutex);
      if (!idle.empty()) {
        auto c = std::move(idle.back());
        idle.pop_back();
        return c;
      }
    }
    return std::make_unique<Connection>(file, SQLITE_OPEN_READONLY);
  }

  void release(std::unique_ptr<Connection> c) {
    std::lock_guard lock(pool_mutex);
    if (idle.size() < 8) idle.push_back(std::move(c));
  }
};

class SqliteSnapshot : public StoreSnapshot {
 public:
  SqliteSnapshot(const SqliteStore& store, SqliteStore::Impl& impl)
      : store_(store), impl_(impl), conn_(impl.acquire()) {
    exec(conn_->db, "BEGIN");
    // A read transaction pins its snapshot at the first read.
    exec(conn_->db, "SELECT count(*) FROM sqlite_master");
  }

  ~SqliteSnapshot() override {
    sqlite3_exec(conn_->db, "COMMIT", nullptr, nullptr, nullptr);
    impl_.release(std::move(conn_));
  }

  std::vector<Cell> get(std::string_view row, const std::vector<std::string>& qualifiers) override {
    store_.count_get();
    std::vector<Cell> out;
    if (qualifiers.empty()) {
      Statement st(conn_->db, "SELECT qual, value FROM kv WHERE row = ?1 ORDER BY qual");
      st.bind(1, row);
      collect(st, out);
      return out;
    }
    for (std::size_t begin = 0; begin < qualifiers.size(); begin += kMaxInList) {
      std::size_t end = std::min(qualifiers.size(), begin + kMaxInList);
      std::string sql = "SELECT qual, value FROM kv WHERE row = ?1 AND qual IN (";
      for (std::size_t i = begin; i < end; ++i) sql += i == begin ? "?" : ",?";
      sql += ") ORDER BY qual";
      Statement st(conn_->db, sql);
      st.bind(1, row);
      for (std::size_t i = begin; i < end; ++i) st.bind(static_cast<int>(i - begin + 2), qualifiers[i]);
      collect(st, out);
    }
    if (qualifiers.size() > kMaxInList) {
      std::sort(out.begin(), out.end(), [](const Cell& a, const Cell& b) { return a.qualifier < b.qualifier; });
      out.erase(std::unique(out.begin(), out.end(),
                            [](const Cell& a, const Cell& b) { return a.qualifier == b.qualifier; }),
                out.end());
    }
    return out;
  }

  void scan(std::string_view row_prefix,
            const std::function<bool(std::string_view, std::string_view, std::string_view)>& visit)
      override {
    std::string upper = prefix_successor(row_prefix);
    Statement st(conn_->db, upper.empty()
                                ? "SELECT row, qual, value FROM kv WHERE row >= ?1 ORDER BY row, qual"
                                : "SELECT row, qual, value FROM kv WHERE row >= ?1 AND row < ?2 "
                                  "ORDER BY row, qual");
    st.bind(1, row_prefix);
    if (!upper.empty()) st.bind(2, upper);
    int rc;
    while ((rc = sqlite3_step(st.stmt)) == SQLITE_ROW) {
      if (!visit(Statement::column(st.stmt, 0), Statement::column(st.stmt, 1),
                 Statement::column(st.stmt, 2))) {
        return;
      }
    }
    check(rc, conn_->db, "scan");
  }

 private:
  const SqliteStore& store_;
  SqliteStore::Impl& impl_;
  std::unique_ptr<Connection> conn_;

  void collect(Statement& st, std::vector<Cell>& out) {
    int rc;
    while ((rc = sqlite3_step(st.stmt)) == SQLITE_ROW) {
      out.push_back({std::string(Statement::column(st.stmt, 0)), std::string(Statement::column(st.stmt, 1))});
    }
    check(rc, conn_->db, "get");
  }
};

SqliteStore::SqliteStore(const std::filesystem::path& file, Mode mode) : impl_(std::make_unique<Impl>()) {
  impl_->file = file;
  impl_->mode = mode;
  if (mode == Mode::read_write) {
    impl_->writer = std::make_unique<Connection>(file, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    exec(impl_->writer->db, "PRAGMA journal_mode=WAL");
    exec(impl_->writer->db, "PRAGMA synchronous=NORMAL");
    exec(impl_->writer->db,
         "CREATE TABLE IF NOT EXISTS kv (row BLOB NOT NULL, qual BLOB NOT NULL, value BLOB NOT NULL, "
         "PRIMARY KEY (row, qual)) WITHOUT ROWID");
  } else if (!std::filesystem::exists(file)) {
    throw StorageError("store does not exist: " + file.string());
  }
}

SqliteStore::~SqliteStore() = default;

std::unique_ptr<StoreSnapshot> SqliteStore::snapshot() const {
  return std::make_unique<SqliteSnapshot>(*this, *impl_);
}

void SqliteStore::write(const WriteBatch& batch) {
  if (impl_->mode != Mode::read_write) throw StorageError("store is open read-only");
  if (batch.empty()) return;
  std::lock_guard lock(impl_->write_mutex);
  sqlite3* db = impl_->writer->db;
  exec(db, "BEGIN IMMEDIATE");
  try {
    Statement put(db, "INSERT OR REPLACE INTO kv (row, qual, value) VALUES (?1, ?2, ?3)");
    Statement del(db, "DELETE FROM kv WHERE row = ?1 AND qual = ?2");
    for (const auto& op : batch.ops()) {
      Statement& st = op.value ? put : del;
      sqlite3_reset(st.stmt);
      st.bind(1, op.row);
      st.bind(2, op.qualifier);
      if (op.value) st.bind(3, *op.value);
      check(sqlite3_step(st.stmt), db, "write");
    }
    exec(db, "COMMIT");
  } catch (...) {
    sqlite3_exec(db, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
}

}  // namespace pathmark

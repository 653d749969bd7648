#include "pathmark/store.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <atomic>

#include "../support/temp_dir.hpp"

namespace pathmark {
namespace {

using testing::TempDir;

enum class Backend { memory, sqlite };

class StoreTest : public ::testing::TestWithParam<Backend> {
 protected:
  void SetUp() override {
    if (GetParam() == Backend::memory) {
      store_ = std::make_shared<MemoryStore>();
    } else {
      store_ = std::make_shared<SqliteStore>(dir_.path() / "kv.sqlite", SqliteStore::Mode::read_write);
    }
  }
  TempDir dir_;
  std::shared_ptr<OrderedStore> store_;
};

TEST_P(StoreTest, GetReturnsRequestedQualifiersInOrder) {
  WriteBatch b;
  b.put("r", "c", "3");
  b.put("r", "a", "1");
  b.put("r", "b", "2");
  b.put("s", "a", "x");
  store_->write(b);
  auto snap = store_->snapshot();
  auto cells = snap->get("r", {"c", "a", "zz"});
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].qualifier, "a");
  EXPECT_EQ(cells[1].value, "3");
  EXPECT_EQ(snap->get("r", {}).size(), 3u);
  EXPECT_TRUE(snap->get("missing", {"a"}).empty());
}

TEST_P(StoreTest, ScanIsOrderedAndPrefixBounded) {
  WriteBatch b;
  b.put("p:b", "2", "");
  b.put("p:a", "1", "");
  b.put("p:a", "0", "");
  b.put("q", "0", "");
  b.put(std::string("p:\xff"), "0", "");
  store_->write(b);
  std::vector<std::string> seen;
  store_->snapshot()->scan("p:", [&](std::string_view r, std::string_view q, std::string_view) {
    seen.push_back(std::string(r) + "/" + std::string(q));
    return true;
  });
  EXPECT_EQ(seen, (std::vector<std::string>{"p:a/0", "p:a/1", "p:b/2", "p:\xff/0"}));
}

TEST_P(StoreTest, EraseAndOverwrite) {
  WriteBatch b;
  b.put("r", "a", "1");
  store_->write(b);
  WriteBatch c;
  c.put("r", "a", "2");
  c.erase("r", "a");
  c.put("r", "b", "3");
  store_->write(c);
  auto cells = store_->snapshot()->get("r", {});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].qualifier, "b");
}

TEST_P(StoreTest, BinarySafeKeysAndValues) {
  std::string row("a\0b", 3), value("\0\x01\xff", 3);
  WriteBatch b;
  b.put(row, std::string("\0", 1), value);
  store_->write(b);
  auto cells = store_->snapshot()->get(row, {std::string("\0", 1)});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].value, value);
}

TEST_P(StoreTest, GetCounterCountsRoundTrips) {
  auto snap = store_->snapshot();
  auto before = store_->get_count();
  std::vector<std::string> many;
  for (int i = 0; i < 1200; ++i) many.push_back(std::to_string(i));
  snap->get("r", many);
  snap->get("r", {});
  EXPECT_EQ(store_->get_count() - before, 2u);
}

TEST_P(StoreTest, SnapshotIgnoresLaterWrites) {
  WriteBatch b;
  b.put("r", "a", "1");
  store_->write(b);
  auto snap = store_->snapshot();
  WriteBatch c;
  c.put("r", "a", "2");
  c.put("r", "b", "2");
  store_->write(c);
  auto cells = snap->get("r", {});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].value, "1");
  EXPECT_EQ(store_->snapshot()->get("r", {}).size(), 2u);
}

TEST_P(StoreTest, ConcurrentReaders) {
  WriteBatch b;
  for (int i = 0; i < 100; ++i) b.put("r", std::to_string(i), std::to_string(i));
  store_->write(b);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        if (store_->snapshot()->get("r", {}).size() == 100) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 80);
}

INSTANTIATE_TEST_SUITE_P(Backends, StoreTest, ::testing::Values(Backend::memory, Backend::sqlite),
                         [](const auto& info) { return info.param == Backend::memory ? "Memory" : "Sqlite"; });

TEST(SqliteStore, ReadOnlyRejectsWrites) {
  TempDir dir;
  auto file = dir.path() / "kv.sqlite";
  EXPECT_THROW(SqliteStore(file, SqliteStore::Mode::read_only), StorageError);
  {
    SqliteStore rw(file, SqliteStore::Mode::read_write);
    WriteBatch b;
    b.put("r", "a", "1");
    rw.write(b);
  }
  SqliteStore ro(file, SqliteStore::Mode::read_only);
  EXPECT_EQ(ro.snapshot()->get("r", {}).size(), 1u);
  WriteBatch b;
  b.put("r", "b", "1");
  EXPECT_THROW(ro.write(b), StorageError);
}

}  // namespace
}  // namespace pathmark

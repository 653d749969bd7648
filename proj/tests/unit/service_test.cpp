#include "pathmark/service.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "../support/temp_dir.hpp"
#include "httplib.h"
#include "json.hpp"
#include "pathmark/synth.hpp"

namespace pathmark {
namespace {

using nlohmann::json;

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(PATHMARK_TEST_DATA) + "/fixtures/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Twenty synthetic state machines plus the phone-call example, indexed as
// type "uml", with every model labeled by whether it is the phone example.
struct ServiceFixture {
  testing::TempDir corpus{"svc-corpus"};
  testing::TempDir index{"svc-index"};
  std::string target_id;
  std::vector<std::string> ids;

  ServiceFixture() {
    for (const auto& cm : generate_state_machines(20, 5)) {
      auto m = cm.model;
      m.model_type = "uml";
      write(corpus.path() / (cm.id + ".json"), serialize_model_json(m));
    }
    write(corpus.path() / "running_left.json", fixture("running_left.json"));
    auto manifest = crawl_directory(corpus.path(), "uml", {"*.json"});
    auto dir = IndexDirectory::open_writer(index.path());
    index_corpus(dir, manifest);
    for (const auto& e : manifest.entries) {
      ids.push_back(e.model_id);
      if (e.source_path == "running_left.json") target_id = e.model_id;
    }
    LabeledCorpus labels;
    for (std::size_t i = 0; i < ids.size(); ++i) labels.labels[ids[i]] = ids[i] == target_id ? "phone" : "device";
    write(index.path() / "labels.csv", labels.to_csv());
  }

  ServiceOptions options() const {
    ServiceOptions o;
    o.labels = index.path() / "labels.csv";
    o.default_k = 3;
    return o;
  }
};

SearchRequest query_request(std::size_t max_results = 5, bool explain = false) {
  return {fixture("running_query.json"), "running_query.json", "uml", max_results, explain};
}

TEST(SearchService, RanksTheExampleFirstWithExplanations) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());
  auto r = svc.search(query_request(5, true));
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  ASSERT_FALSE(j["results"].empty());
  EXPECT_EQ(j["results"][0]["id"], f.target_id);
  EXPECT_LE(j["results"].size(), 5u);
  EXPECT_EQ(j["query"]["model_type"], "uml");
  EXPECT_GT(j["query"]["paths"].get<int>(), 0);
  const auto& matched = j["results"][0]["matched_paths"];
  ASSERT_FALSE(matched.empty());
  double sum = 0;
  for (const auto& m : matched) {
    sum += m["contribution"].get<double>();
    EXPECT_FALSE(m["segments"].empty());
  }
  EXPECT_NEAR(sum, j["results"][0]["score"].get<double>(), 1e-9);
  // Scores are non-increasing.
  for (std::size_t i = 1; i < j["results"].size(); ++i) {
    EXPECT_GE(j["results"][i - 1]["score"].get<double>(), j["results"][i]["score"].get<double>());
  }
}

TEST(SearchService, RejectsBadRequests) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());

  auto bad = query_request();
  bad.payload = "{\"modelType\": \"uml\", \"objects\": [";
  EXPECT_EQ(svc.search(bad).status, 400);

  auto dangling = query_request();
  dangling.payload = R"({"modelType":"uml","objects":[{"id":"a","class":"A","refs":{"r":["zz"]}}]})";
  auto r = svc.search(dangling);
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body.find("zz"), std::string::npos) << r.body;

  auto empty = query_request();
  empty.payload.clear();
  EXPECT_EQ(svc.search(empty).status, 400);

  auto unknown = query_request();
  unknown.model_type = "bpmn";
  EXPECT_EQ(svc.search(unknown).status, 404);

  EXPECT_EQ(svc.search(query_request(0)).status, 400);
  EXPECT_EQ(svc.search(query_request(kMaxResultsCap + 1)).status, 400);
}

TEST(SearchService, OversizedPayloadIs413) {
  ServiceFixture f;
  auto opt = f.options();
  opt.max_body = 64;
  auto svc = SearchService::open(f.index.path(), opt);
  EXPECT_EQ(svc.search(query_request()).status, 413);
}

TEST(SearchService, EmptyModelGivesNoResults) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());
  auto req = query_request();
  req.payload = R"({"modelType":"uml","objects":[]})";
  auto r = svc.search(req);
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_TRUE(json::parse(r.body)["results"].empty());
}

TEST(SearchService, ReturnsStoredModelBytes) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());
  auto r = svc.model(f.target_id);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body, fixture("running_left.json"));
  EXPECT_EQ(r.content_type, "application/json");
  EXPECT_EQ(r.headers["X-Model-Type"], "uml");
  EXPECT_EQ(r.headers["X-Content-Hash"], sha256_hex(r.body));
  EXPECT_EQ(svc.model("nope").status, 404);
  EXPECT_EQ(svc.model(f.target_id, "bpmn").status, 404);
}

TEST(SearchService, StatsPerType) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());
  auto j = json::parse(svc.stats().body);
  EXPECT_EQ(j["models"], 21);
  EXPECT_EQ(j["model_types"]["uml"]["t"], 21);
  EXPECT_GT(j["model_types"]["uml"]["avdl"].get<double>(), 0);
}

TEST(SearchService, ClassifiesWithLabels) {
  ServiceFixture f;
  auto svc = SearchService::open(f.index.path(), f.options());
  auto r = svc.classify({fixture("running_query.json"), "q.json", "uml", 1});
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_EQ(j["label"], "phone");
  EXPECT_EQ(j["neighbors"].size(), 1u);

  svc.set_labels(LabeledCorpus::parse_csv("model_id,label\nghost,x\n"));
  EXPECT_EQ(svc.classify({fixture("running_query.json"), "q.json", "uml", 3}).status, 422);

  SearchService unlabeled = SearchService::open(f.index.path());
  EXPECT_EQ(unlabeled.classify({fixture("running_query.json"), "q.json", "uml", 3}).status, 400);
}

TEST(HttpServer, RoundTripOverLoopback) {
  ServiceFixture f;
  auto opt = f.options();
  opt.port = 0;
  auto svc = SearchService::open(f.index.path(), opt);
  HttpServer server(svc, opt);
  const int port = server.bind();
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  httplib::MultipartFormDataItems items = {
      {"file", fixture("running_query.json"), "running_query.json", "application/json"},
      {"modelType", "uml", "", ""},
      {"maxResults", "3", "", ""},
      {"explain", "true", "", ""},
  };
  auto res = client.Post("/search", {{"Origin", "http://example.org"}}, items);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto j = json::parse(res->body);
  EXPECT_EQ(j["results"][0]["id"], f.target_id);
  EXPECT_EQ(j["results"].size(), 3u);

  httplib::MultipartFormDataItems bad_k = {
      {"file", fixture("running_query.json"), "q.json", ""}, {"modelType", "uml", "", ""}, {"k", "-2", "", ""}};
  auto bad = client.Post("/classify", bad_k);
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto model = client.Get("/model/" + f.target_id);
  ASSERT_TRUE(model);
  EXPECT_EQ(model->status, 200);
  EXPECT_EQ(model->get_header_value("X-Model-Type"), "uml");

  auto stats = client.Get("/stats");
  ASSERT_TRUE(stats);
  EXPECT_EQ(json::parse(stats->body)["models"], 21);

  auto missing = client.Get("/nowhere");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_TRUE(json::parse(missing->body).contains("error"));

  auto preflight = client.Options("/search");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);

  server.stop();
  t.join();
}

}  // namespace
}  // namespace pathmark

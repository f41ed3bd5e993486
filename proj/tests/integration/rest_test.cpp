#include <gtest/gtest.h>
#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "expltk/annotation_service.hpp"
#include "expltk/error.hpp"
#include "expltk/pipeline.hpp"
#include "test_support.hpp"

namespace expltk {
namespace {

using nlohmann::json;
using testing::TempDir;
namespace fs = std::filesystem;

std::vector<AnnotationTask> tasks() {
  std::vector<AnnotationTask> out;
  for (const char* id : {"t0", "t1"}) {
    AnnotationTask t;
    t.task_id = id;
    t.pair_id = std::string("p") + id;
    t.src_raw = "Villepin parle";
    t.tgt_raw = "Villepin, the French minister, speaks";
    t.unaligned_spans = {{8, 29}};
    t.tgt_entity_spans = {{0, 8}};
    out.push_back(t);
  }
  return out;
}

// Server on a free port, listening on a background thread.
class LiveServer {
 public:
  LiveServer(AnnotationService& service, std::optional<fs::path> static_dir = std::nullopt)
      : server_(service, std::move(static_dir)) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    c.set_read_timeout(5);
    return c;
  }

 private:
  AnnotationServer server_;
  int port_ = 0;
  std::thread thread_;
};

const char* kPositive =
    R"({"task_id":"t0","annotator_id":"ann1","category":"AdditionalInformation",)"
    R"("is_explicitation":true,"src_span":[0,8],"tgt_span":[8,29]})";

TEST(Rest, TaskLabelProgressRoundTrip) {
  TempDir dir("rest");
  AnnotationService service(tasks(), {1, dir / "labels.jsonl"});
  LiveServer server(service);
  auto c = server.client();

  auto next = c.Get("/api/tasks/next?annotator=ann1");
  ASSERT_TRUE(next);
  ASSERT_EQ(next->status, 200);
  EXPECT_EQ(next->get_header_value("Content-Type"), "application/json");
  const auto task = json::parse(next->body);
  EXPECT_EQ(task.at("task_id"), "t0");
  EXPECT_EQ(task.at("tgt_entity_spans"), json::parse("[[0,8]]"));

  auto posted = c.Post("/api/labels", kPositive, "application/json");
  ASSERT_TRUE(posted);
  ASSERT_EQ(posted->status, 200) << posted->body;
  EXPECT_EQ(json::parse(posted->body).at("next_task").at("task_id"), "t1");

  // t0 is complete with one label per task, so ann2 gets t1.
  auto other = c.Get("/api/tasks/next?annotator=ann2");
  ASSERT_TRUE(other);
  EXPECT_EQ(json::parse(other->body).at("task_id"), "t1");

  auto progress = c.Get("/api/progress");
  ASSERT_TRUE(progress);
  const auto p = json::parse(progress->body);
  EXPECT_EQ(p.at("tasks"), 2);
  EXPECT_EQ(p.at("labels"), 1);
  EXPECT_EQ(p.at("complete_tasks"), 1);

  const auto stored = pipeline::read_labels(dir / "labels.jsonl");
  ASSERT_EQ(stored.size(), 1u);
  EXPECT_EQ(stored[0].tgt_span, (CharSpan{8, 29}));
}

TEST(Rest, ErrorStatuses) {
  AnnotationService service(tasks(), {});
  LiveServer server(service);
  auto c = server.client();
  EXPECT_EQ(c.Get("/api/tasks/next")->status, 400);
  EXPECT_EQ(c.Get("/api/labels")->status, 405);
  EXPECT_EQ(c.Post("/api/progress", "", "application/json")->status, 405);
  EXPECT_EQ(c.Post("/api/labels", "{", "application/json")->status, 400);
  auto missing_flag = c.Post(
      "/api/labels", R"({"task_id":"t0","annotator_id":"a","category":"AdditionalInformation"})",
      "application/json");
  EXPECT_EQ(missing_flag->status, 400);
  EXPECT_NE(json::parse(missing_flag->body).at("error").get<std::string>().find("is_explicitation"),
            std::string::npos);
  EXPECT_EQ(c.Post("/api/labels", R"({"task_id":"zz","annotator_id":"a","category":"Paraphrase"})",
                   "application/json")
                ->status,
            404);
  EXPECT_EQ(c.Get("/nothing/here")->status, 404);
  EXPECT_TRUE(service.records().empty());
}

TEST(Rest, NoContentWhenQueueIsEmpty) {
  AnnotationService service(tasks(), {1, std::nullopt});
  LiveServer server(service);
  auto c = server.client();
  for (const char* id : {"t0", "t1"}) {
    const json label = {{"task_id", id}, {"annotator_id", "x"}, {"category", "Paraphrase"}};
    ASSERT_EQ(c.Post("/api/labels", label.dump(), "application/json")->status, 200);
  }
  auto none = c.Get("/api/tasks/next?annotator=y");
  ASSERT_TRUE(none);
  EXPECT_EQ(none->status, 204);
  EXPECT_TRUE(none->body.empty());
}

TEST(Rest, StaticAssetsAndReplayAfterRestart) {
  TempDir dir("rest-static");
  fs::create_directories(dir / "ui");
  testing::spit(dir / "ui" / "index.html", "<!doctype html><title>annotate</title>");
  const auto log = dir / "labels.jsonl";
  {
    AnnotationService service(tasks(), {3, log});
    LiveServer server(service, dir / "ui");
    auto c = server.client();
    auto page = c.Get("/index.html");
    ASSERT_TRUE(page);
    EXPECT_EQ(page->status, 200);
    EXPECT_EQ(page->body, "<!doctype html><title>annotate</title>");
    EXPECT_EQ(c.Get("/")->status, 200);
    ASSERT_EQ(c.Post("/api/labels", kPositive, "application/json")->status, 200);
  }
  AnnotationService restarted(tasks(), {3, log});
  LiveServer server(restarted);
  auto c = server.client();
  EXPECT_EQ(json::parse(c.Get("/api/tasks/next?annotator=ann1")->body).at("task_id"), "t1");
  EXPECT_EQ(json::parse(c.Get("/api/progress")->body).at("labels"), 1);
  EXPECT_THROW(AnnotationServer(restarted, dir / "missing"), Error);
}

}  // namespace
}  // namespace expltk

/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include <gtest/gtest.h>
#include <sys/socket.h>

#include <fstream>

#include <algorithm>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sqlrl/error.hpp"
#include "sqlrl/net.hpp"
#include "sqlrl/protocol.hpp"
#include "sqlrl/provider.hpp"
#include "sqlrl/service.hpp"
#include "testkit.hpp"

using namespace sqlrl;
using nlohmann::json;

namespace {

// Runs a service on an ephemeral port for the lifetime of the object.
class RunningService {
  public:
    explicit RunningService(int workers)
        : service_(service::ServiceOptions{workers, kDefaultTimeoutMs, 8, {}})
    {
        std::promise<int> ready;
        auto port = ready.get_future();
        thread_ = std::thread([&] { service_.serve_tcp({"127.0.0.1", 0}, [&](int p) { ready.set_value(p); }); });
        port_ = port.get();
    }
    ~RunningService()
    {
        service_.stop();
        thread_.join();
    }

    [[nodiscard]] int port() const { return port_; }

  private:
    service::ScoringService service_;
    std::thread thread_;
    int port_ = 0;
};

std::vector<std::string> exchange(int port, const std::vector<std::string>& lines)
{
    auto sock = net::connect_tcp({"127.0.0.1", port});
    std::thread writer([&] {
        for (const auto& l : lines) net::write_all(sock.fd(), l + "\n");
        ::shutdown(sock.fd(), SHUT_WR);
    });
    net::LineReader reader(sock.fd());
    std::vector<std::string> out;
    while (auto line = reader.next()) out.push_back(*line);
    writer.join();
    return out;
}

std::map<std::string, std::string> by_id(const std::vector<std::string>& lines)
{
    std::map<std::string, std::string> out;
    for (const auto& l : lines) out[json::parse(l).at("request_id").dump()] = l;
    return out;
}

} // namespace

class ProtocolTest : public testing::Test {
  protected:
    void SetUp() override { dbs = testkit::build_mini_databases(dir.path()); }

    std::string request(const std::string& id, const std::vector<std::string>& candidates,
                        const std::string& db_path = {}) const
    {
        return json{{"request_id", id},
                    {"db_path", db_path.empty() ? dbs.retail.path().string() : db_path},
                    {"gold_sql", "SELECT name FROM customers WHERE city = 'Paris'"},
                    {"candidates", candidates}}
            .dump();
    }

    testkit::TempDir dir;
    testkit::MiniDatabases dbs;
};

TEST_F(ProtocolTest, GoldAndGarbage)
{
    protocol::Session session({});
    const auto line = session.handle(request("r1", {testkit::answer("SELECT name FROM customers WHERE city = 'Paris'"),
                                                    "garbage"}));
    ASSERT_TRUE(line);
    const auto resp = protocol::response_from_json(json::parse(*line));
    EXPECT_EQ(resp.request_id, "r1");
    EXPECT_EQ(resp.rewards, (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(resp.tiers, (std::vector<std::string>{"Correct", "Invalid"}));
    EXPECT_FALSE(resp.diagnostics[0]);
    EXPECT_TRUE(resp.diagnostics[1]);
}

TEST_F(ProtocolTest, ErrorsCarryKindAndId)
{
    protocol::Session session({});
    auto err = json::parse(*session.handle(request("r2", {"x"}, (dir / "missing.sqlite").string())));
    EXPECT_EQ(err.at("request_id"), "r2");
    EXPECT_EQ(err.at("error").at("kind"), "DatabaseUnavailable");

    err = json::parse(*session.handle("{not json"));
    EXPECT_TRUE(err.at("request_id").is_null());
    EXPECT_EQ(err.at("error").at("kind"), "MalformedRequest");

    err = json::parse(*session.handle(R"({"request_id": 5, "db_path": "x", "gold_sql": "SELECT 1", "candidates": []})"));
    EXPECT_EQ(err.at("request_id"), 5);
    EXPECT_EQ(err.at("error").at("kind"), "MalformedRequest");

    (void)session.handle(request("dup", {"x"}));
    err = json::parse(*session.handle(request("dup", {"x"})));
    EXPECT_EQ(err.at("error").at("kind"), "DuplicateRequestId");

    EXPECT_FALSE(session.handle("   "));
}

TEST_F(ProtocolTest, RequestRoundTrip)
{
    const auto j = json::parse(request("r3", {"a", "b"}));
    auto parsed = protocol::parse_request(j);
    EXPECT_EQ(parsed.candidates.size(), 2u);
    EXPECT_FALSE(parsed.timeout_ms);
    parsed.timeout_ms = 250;
    const auto back = protocol::parse_request(protocol::request_to_json(parsed));
    EXPECT_EQ(back.timeout_ms, 250);
    EXPECT_THROW((void)protocol::parse_request(json{{"request_id", 1.5}, {"db_path", "x"}, {"gold_sql", "s"},
                                                    {"candidates", {"a"}}}),
                 Error);
}

TEST_F(ProtocolTest, StreamModeMatchesSequentialScoring)
{
    const auto lines = testkit::score_request_lines(dbs, 64, 1);
    protocol::Session session({});
    std::vector<std::string> expected;
    for (const auto& l : lines) expected.push_back(*session.handle(l));

    std::string input;
    for (const auto& l : lines) input += l + "\n";
    for (int workers : {1, 4}) {
        std::istringstream in(input);
        std::ostringstream out;
        service::ScoringService svc({workers, kDefaultTimeoutMs, 4, {}});
        svc.serve_stream(in, out);
        std::vector<std::string> got;
        std::istringstream split(out.str());
        for (std::string l; std::getline(split, l);) got.push_back(l);
        EXPECT_EQ(by_id(got), by_id(expected));
    }
}

TEST_F(ProtocolTest, TcpPipelinedRequestsAcrossWorkerCounts)
{
    const auto lines = testkit::score_request_lines(dbs, 256, 2);
    protocol::Session session({});
    std::vector<std::string> expected;
    for (const auto& l : lines) expected.push_back(*session.handle(l));
    const auto want = by_id(expected);

    for (int workers : {1, 4, 16}) {
        RunningService svc(workers);
        const auto got = exchange(svc.port(), lines);
        ASSERT_EQ(got.size(), 256u) << workers;
        EXPECT_EQ(by_id(got), want) << workers;
    }
}

TEST_F(ProtocolTest, TcpSurvivesMalformedLines)
{
    RunningService svc(2);
    const auto got = exchange(svc.port(), {"garbage", request("ok", {"x"}), "{\"request_id\": \"half\"}"});
    ASSERT_EQ(got.size(), 3u);
    const auto ids = by_id(got);
    EXPECT_TRUE(ids.count("null"));
    EXPECT_TRUE(ids.count("\"ok\""));
    EXPECT_TRUE(ids.count("\"half\""));
    // The service keeps accepting new connections.
    EXPECT_EQ(exchange(svc.port(), {request("again", {"x"})}).size(), 1u);
}

TEST(Endpoint, Parse)
{
    const auto e = net::parse_endpoint("0.0.0.0:9000");
    EXPECT_EQ(e.host, "0.0.0.0");
    EXPECT_EQ(e.port, 9000);
    EXPECT_EQ(net::parse_endpoint(":81").host, "127.0.0.1");
    EXPECT_THROW((void)net::parse_endpoint("nope"), Error);
    EXPECT_THROW((void)net::parse_endpoint("h:70000"), Error);
}

TEST(LineProtocolProvider, TalksToCompletionEndpoint)
{
    auto listener = net::listen_tcp({"127.0.0.1", 0});
    const int port = net::local_port(listener);
    std::vector<json> seen;
    std::thread server([&] {
        net::Socket conn(::accept(listener.fd(), nullptr, nullptr));
        net::LineReader reader(conn.fd());
        for (int i = 0; i < 2; ++i) {
            const auto line = reader.next();
            if (!line) return;
            seen.push_back(json::parse(*line));
            const json reply = i == 0 ? json{{"request_id", seen.back().at("request_id")}, {"completions", {"a", "b"}}}
                                      : json{{"request_id", seen.back().at("request_id")}, {"error", "overloaded"}};
            net::write_all(conn.fd(), reply.dump() + "\n");
        }
    });
    LineProtocolProvider provider({"127.0.0.1", port});
    EXPECT_EQ(provider.complete({"p", 1.0, 2}), (std::vector<std::string>{"a", "b"}));
    try {
        (void)provider.complete({"p2", 0.0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderUnavailable);
    }
    server.join();
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0].at("type"), "completion");
    EXPECT_EQ(seen[0].at("prompt"), "p");
    EXPECT_EQ(seen[0].at("n"), 2);
    EXPECT_NE(seen[0].at("request_id"), seen[1].at("request_id"));
}

TEST(LineProtocolProvider, UnreachableEndpoint)
{
    int port = 0;
    {
        auto probe = net::listen_tcp({"127.0.0.1", 0});
        port = net::local_port(probe);
    }
    LineProtocolProvider provider({"127.0.0.1", port});
    EXPECT_THROW((void)provider.complete({"p", 1.0, 1}), Error);
}

TEST(ScriptedProvider, ReadsTranscriptFile)
{
    testkit::TempDir dir;
    std::ofstream(dir / "t.jsonl") << R"({"completions": ["one"]})" << "\n" << R"({"error": "down"})" << "\n";
    ScriptedProvider provider(ScriptedProvider::read_transcript(dir / "t.jsonl"));
    EXPECT_EQ(provider.complete({"x", 1.0, 1}), (std::vector<std::string>{"one"}));
    EXPECT_THROW((void)provider.complete({"y", 1.0, 1}), Error);
    EXPECT_THROW((void)provider.complete({"z", 1.0, 1}), Error);
    EXPECT_EQ(provider.calls(), 3u);
}

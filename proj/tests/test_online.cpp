#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support/fixtures.hpp"
#include "wsc/online.hpp"
#include "wsc/online_stream.hpp"

namespace wsc {
namespace {

using io::Json;

class Scenario {
public:
    explicit Scenario(OnlineOptions options = {}) : state(options) {}

    ParamSet params(std::initializer_list<const char*> list) {
        ParamSet out;
        for (const char* n : list) out.push_back(names.intern(n));
        return make_param_set(std::move(out));
    }
    std::vector<OnlineEvent> add(const char* name, std::initializer_list<const char*> in,
                                 std::initializer_list<const char*> out) {
        return state.register_service(Service{name, params(in), params(out)});
    }
    std::vector<OnlineEvent> ask(const char* id, std::initializer_list<const char*> known,
                                 std::initializer_list<const char*> required) {
        return state.find_composition(id, OnlineQuery{params(known), params(required)});
    }
    OnlineQuery query(std::initializer_list<const char*> known, std::initializer_list<const char*> required) {
        return OnlineQuery{params(known), params(required)};
    }

    // The driving-conditions repository, in registration order.
    void load_driving_conditions() {
        add("locatePhone", {"phoneNumber"}, {"address", "district"});
        add("getWeather", {"address"}, {"weather"});
        add("getLatLon", {"address"}, {"latitude", "longitude"});
        add("getCityCenter", {"district"}, {"latitude", "longitude"});
        add("getMap", {"latitude", "longitude"}, {"map"});
        add("nearbyStreet", {"map", "address"}, {"street"});
        add("trafficInfo", {"street"}, {"trafficReport"});
        add("getCityDistrict", {"cityName"}, {"district"});
    }
    void ask_driving_conditions() {
        ask("getDrivingConditions", {"phoneNumber"}, {"weather", "trafficReport"});
        ask("getCityMap", {"cityName"}, {"map"});
    }

    ParameterRegistry names;
    OnlineState state;
};

bool contains(const std::vector<std::string>& v, const char* s) { return std::find(v.begin(), v.end(), s) != v.end(); }

TEST(DistanceScore, DirectProducerScoresOne) {
    Scenario s;
    s.add("direct", {"a"}, {"g"});
    auto t = s.state.compute_service_scores(s.query({"a"}, {"g"}));
    EXPECT_EQ(t.at("direct"), 1u);
}

TEST(DistanceScore, EmptyRepoGivesEmptyTable) {
    Scenario s;
    EXPECT_TRUE(s.state.compute_service_scores(s.query({"a"}, {"g"})).empty());
}

TEST(DistanceScore, ChainCountsDown) {
    Scenario s;
    s.add("s1", {"a"}, {"b"});
    s.add("s2", {"b"}, {"c"});
    s.add("s3", {"c"}, {"g"});
    auto t = s.state.compute_service_scores(s.query({"a"}, {"g"}));
    EXPECT_EQ(t.at("s1"), 3u);
    EXPECT_EQ(t.at("s2"), 2u);
    EXPECT_EQ(t.at("s3"), 1u);
}

TEST(FindComposition, DrivingConditionsQueries) {
    Scenario s;
    s.load_driving_conditions();
    auto ev = s.ask("getDrivingConditions", {"phoneNumber"}, {"weather", "trafficReport"});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "solved");
    EXPECT_EQ(ev[0].calls.size(), 6u);
    EXPECT_TRUE(contains(ev[0].calls, "getLatLon"));
    ev = s.ask("getCityMap", {"cityName"}, {"map"});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].calls, (std::vector<std::string>{"getCityDistrict", "getCityCenter", "getMap"}));
    EXPECT_TRUE(s.state.usages_consistent());
    EXPECT_TRUE(s.state.solutions_valid());
}

TEST(Register, ReoptimizeAdoptsShorterBypass) {
    Scenario s(OnlineOptions{.reoptimize = true});
    s.add("s1", {"a"}, {"b"});
    s.add("s2", {"b"}, {"c"});
    s.add("s3", {"c"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    ASSERT_EQ(s.state.solution("q")->main.size(), 3u);
    auto ev = s.add("bypass", {"a"}, {"g"});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "solved");
    EXPECT_EQ(s.state.solution("q")->main, (std::vector<std::string>{"bypass"}));
    EXPECT_TRUE(s.state.usages_consistent());
}

TEST(Register, WithoutReoptimizeSolvedQueriesStay) {
    Scenario s;
    s.add("s1", {"a"}, {"b"});
    s.add("s2", {"b"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    EXPECT_TRUE(s.add("bypass", {"a"}, {"g"}).empty());
    EXPECT_EQ(s.state.solution("q")->main.size(), 2u);
}

TEST(FindComposition, UnsolvableRegistersNoUsages) {
    Scenario s;
    s.load_driving_conditions();
    auto ev = s.ask("q", {"phoneNumber"}, {"nothingMakesThis"});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "unsolvable");
    EXPECT_EQ(s.state.solution("q"), nullptr);
    EXPECT_TRUE(s.state.usages().empty());
}

TEST(FindComposition, DuplicateIdRejected) {
    Scenario s;
    s.load_driving_conditions();
    s.ask("q", {"cityName"}, {"map"});
    EXPECT_THROW(s.ask("q", {"cityName"}, {"map"}), std::invalid_argument);
}

TEST(Backups, LatLonBackupUsesCityCenter) {
    Scenario s;
    s.load_driving_conditions();
    s.ask_driving_conditions();
    const Solution* sol = s.state.solution("getDrivingConditions");
    ASSERT_NE(sol, nullptr);
    ASSERT_TRUE(sol->backup.contains("getLatLon"));
    const auto& b = *sol->backup.at("getLatLon");
    EXPECT_EQ(b.type, 1);
    EXPECT_TRUE(contains(b.stitched, "getCityCenter"));
    EXPECT_FALSE(contains(b.stitched, "getLatLon"));
}

TEST(Backups, IrreplaceableServiceHasNoEntry) {
    Scenario s;
    s.add("only", {"a"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    EXPECT_TRUE(s.state.solution("q")->backup.empty());
}

TEST(PlanBackup, FirstPositionStartsFromQueryInputs) {
    Scenario s;
    s.add("first", {"a"}, {"b"});
    s.add("second", {"b"}, {"g"});
    s.add("alt", {"a"}, {"b"});
    std::atomic<std::size_t> searches{0};
    auto plan = plan_backup(s.state.repository(), s.query({"a"}, {"g"}), {"first", "second"}, 0, searches);
    ASSERT_TRUE(plan);
    EXPECT_EQ(plan->type, 1);
    EXPECT_EQ(plan->replacement, (std::vector<std::string>{"alt"}));
    EXPECT_EQ(plan->stitched, (std::vector<std::string>{"alt", "second"}));
    EXPECT_GE(searches.load(), 1u);
}

TEST(PlanBackup, SuffixReplacementIsTypeTwo) {
    Scenario s;
    s.add("first", {"a"}, {"b"});
    s.add("second", {"b"}, {"c"});
    s.add("third", {"c"}, {"g"});
    // Nothing else makes c, so only a new suffix can reach g.
    s.add("alt1", {"a"}, {"x"});
    s.add("alt2", {"x"}, {"g"});
    std::atomic<std::size_t> searches{0};
    auto plan = plan_backup(s.state.repository(), s.query({"a"}, {"g"}), {"first", "second", "third"}, 1, searches);
    ASSERT_TRUE(plan);
    EXPECT_EQ(plan->type, 2);
    EXPECT_FALSE(contains(plan->stitched, "second"));
    EXPECT_EQ(plan->stitched.back(), "alt2");
}

TEST(Delete, LatLonSwapsWithoutSearching) {
    Scenario s;
    s.load_driving_conditions();
    s.ask_driving_conditions();
    const auto city_map = s.state.solution("getCityMap")->main;
    const auto searches = s.state.search_count();
    auto ev = s.state.delete_service("getLatLon");
    ASSERT_GE(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "swapped_to_backup");
    EXPECT_EQ(ev[0].id, "getDrivingConditions");
    EXPECT_TRUE(contains(ev[0].calls, "getCityCenter"));
    ASSERT_TRUE(ev[0].searches);
    EXPECT_EQ(*ev[0].searches, 0u);
    for (const auto& e : ev) EXPECT_NE(e.id, "getCityMap");
    EXPECT_EQ(s.state.solution("getCityMap")->main, city_map);
    EXPECT_GE(s.state.search_count(), searches);
    EXPECT_TRUE(s.state.usages_consistent());
    EXPECT_TRUE(s.state.solutions_valid());
}

TEST(Delete, UnusedServiceChangesNothing) {
    Scenario s;
    s.load_driving_conditions();
    s.add("unused", {"weather"}, {"umbrella"});
    s.ask_driving_conditions();
    EXPECT_TRUE(s.state.delete_service("unused").empty());
    EXPECT_TRUE(s.state.usages_consistent());
}

TEST(Delete, BackupOnlyServiceRecomputesEntry) {
    Scenario s;
    s.load_driving_conditions();
    s.ask("getDrivingConditions", {"phoneNumber"}, {"weather", "trafficReport"});
    const auto main = s.state.solution("getDrivingConditions")->main;
    auto ev = s.state.delete_service("getCityCenter");
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "backup_recomputed");
    EXPECT_EQ(ev[0].service, "getLatLon");
    EXPECT_EQ(s.state.solution("getDrivingConditions")->main, main);
    EXPECT_FALSE(s.state.solution("getDrivingConditions")->backup.contains("getLatLon"));
    EXPECT_TRUE(s.state.usages_consistent());
}

TEST(Delete, NoBackupResolvesOrLoses) {
    Scenario s;
    s.add("only", {"a"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    auto ev = s.state.delete_service("only");
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "request_lost");
    EXPECT_EQ(s.state.solution("q"), nullptr);
    EXPECT_TRUE(s.state.has_request("q"));

    // Registering a fresh producer brings the request back.
    ev = s.add("again", {"a"}, {"g"});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "solved");
}

TEST(Delete, ResolvedFromScratchWhenNoBackupButAlternativeAppears) {
    Scenario s;
    s.add("only", {"a"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    // Registered after the backups were computed; the stored plan knows nothing of it.
    s.add("later", {"a"}, {"g"});
    auto ev = s.state.delete_service("only");
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, "resolved_from_scratch");
    EXPECT_EQ(ev[0].calls, (std::vector<std::string>{"later"}));
}

TEST(Delete, UnknownServiceThrows) {
    Scenario s;
    EXPECT_THROW(s.state.delete_service("ghost"), UnknownServiceError);
}

TEST(Register, IrrelevantServiceChangesNothing) {
    Scenario s;
    s.load_driving_conditions();
    s.ask_driving_conditions();
    EXPECT_TRUE(s.add("noise", {"x"}, {"y"}).empty());
}

TEST(Register, DuplicateNameRejected) {
    Scenario s;
    s.add("a", {"x"}, {"y"});
    EXPECT_THROW(s.add("a", {"x"}, {"z"}), DuplicateServiceError);
}

TEST(Drop, ThenDeleteProducesNoOutcome) {
    Scenario s;
    s.add("only", {"a"}, {"g"});
    s.ask("q", {"a"}, {"g"});
    s.state.drop_composition_request("q");
    EXPECT_TRUE(s.state.delete_service("only").empty());
    EXPECT_TRUE(s.state.usages().empty());
}

TEST(Drop, SharedServiceKeepsOtherUsage) {
    Scenario s;
    s.add("shared", {"a"}, {"g"});
    s.ask("q1", {"a"}, {"g"});
    s.ask("q2", {"a"}, {"g"});
    s.state.drop_composition_request("q1");
    ASSERT_TRUE(s.state.usages().contains("shared"));
    EXPECT_EQ(s.state.usages().at("shared").size(), 1u);
    EXPECT_EQ((*s.state.usages().at("shared").begin())->request_id, "q2");
    EXPECT_TRUE(s.state.usages_consistent());
}

TEST(Drop, UnknownRequestThrows) {
    Scenario s;
    EXPECT_THROW(s.state.drop_composition_request("nope"), std::invalid_argument);
}

TEST(Stream, DrivingConditionsReplay) {
    std::ifstream in(test::fixture_path("driving_conditions.jsonl"));
    OnlineSession session;
    auto events = run_stream(in, session);
    ASSERT_EQ(events.size(), 3u);
    EXPECT_EQ(events[2]["event"], "swapped_to_backup");
    EXPECT_EQ(events[2]["id"], "getDrivingConditions");
    EXPECT_EQ(events[2]["searches"], 0);
}

TEST(Stream, AsyncMatchesSync) {
    std::ifstream a(test::fixture_path("driving_conditions.jsonl")), b(test::fixture_path("driving_conditions.jsonl"));
    OnlineSession sync_session, async_session(OnlineOptions{.async_backups = true});
    EXPECT_EQ(run_stream(a, sync_session), run_stream(b, async_session));
}

TEST(Stream, OperationFailureBecomesErrorEvent) {
    OnlineSession session;
    auto ev = session.apply(Json{{"op", "drop_request"}, {"id", "nope"}});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0]["event"], "error");
}

TEST(Stream, MalformedLinesAreInputErrors) {
    OnlineSession session;
    std::istringstream bad("{\"op\": \"register_service\"\n");
    EXPECT_THROW(run_stream(bad, session), io::InputError);
    EXPECT_THROW(session.apply(Json{{"op", "teleport"}}), io::InputError);
    EXPECT_THROW(session.apply(Json{{"op", "register_service"}, {"name", "x"}}), io::InputError);
}

// Random operation sequences keep the usages index an exact inverse of the
// solutions, in both backup modes.
TEST(Usages, StayConsistentUnderRandomOperations) {
    for (bool async : {false, true}) {
        std::mt19937_64 rng(async ? 21 : 20);
        Scenario s(OnlineOptions{.async_backups = async});
        std::vector<std::string> live;
        std::vector<std::string> queries;
        auto p = [&] { return "p" + std::to_string(rng() % 12); };
        for (int step = 0; step < 300; ++step) {
            switch (rng() % 5) {
                case 0:
                case 1: {
                    std::string name = "s" + std::to_string(step);
                    ParamSet in{s.names.intern(p())}, out;
                    while (out.empty()) {
                        auto o = s.names.intern(p());
                        if (!wsc::contains(in, o)) out.push_back(o);
                    }
                    s.state.register_service(Service{name, in, make_param_set(out)});
                    live.push_back(name);
                    break;
                }
                case 2:
                    if (!live.empty()) {
                        auto i = rng() % live.size();
                        s.state.delete_service(live[i]);
                        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
                    }
                    break;
                case 3: {
                    std::string id = "q" + std::to_string(step);
                    s.state.find_composition(id, OnlineQuery{{s.names.intern(p())}, {s.names.intern(p())}});
                    queries.push_back(id);
                    break;
                }
                default:
                    if (!queries.empty()) {
                        auto i = rng() % queries.size();
                        s.state.drop_composition_request(queries[i]);
                        queries.erase(queries.begin() + static_cast<std::ptrdiff_t>(i));
                    }
            }
            s.state.finish();
            ASSERT_TRUE(s.state.usages_consistent()) << "step " << step;
            ASSERT_TRUE(s.state.solutions_valid()) << "step " << step;
        }
    }
}

}  // namespace
}  // namespace wsc

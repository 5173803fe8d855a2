#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "wsc/cli.hpp"
#include "wsc/genbench.hpp"
#include "wsc/io.hpp"
#include "wsc/name_engine.hpp"
#include "wsc/online_stream.hpp"
#include "wsc/oo.hpp"
#include "wsc/relational.hpp"
#include "wsc/taxonomy.hpp"

namespace wsc {
namespace {

using io::Json;

// ---- monotone knowledge ----

TEST(MonotoneKnowledge, NamePrefixesOnlyGrow) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 100; ++round) {
        auto small = oracle::random_small_instance(rng, 2 + rng() % 7, 9);
        auto problem = io::parse_name(oracle::to_instance_json(small));
        auto comp = find_composition(problem.repo, problem.request, {.use_scores = true, .reduce = false});
        if (!comp) continue;
        ParamSet known = problem.request.init;
        for (const auto* s : resolve_calls(problem.repo, comp->calls)) {
            auto next = set_union(known, s->outputs);
            ASSERT_TRUE(is_subset(known, next));
            ASSERT_TRUE(is_subset(s->inputs, known)) << "round " << round;
            known = std::move(next);
        }
        EXPECT_TRUE(is_subset(problem.request.goal, known));
    }
}

TEST(MonotoneKnowledge, RelationalObjectsAndTriplesOnlyGrow) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        gen::GenConfig cfg;
        cfg.seed = seed;
        cfg.num_web_services = 25;
        auto inst = io::parse_relational(gen::generate_relational_instance(cfg).instance);
        RelationalEngine e(inst);
        e.seed();
        e.apply_inference_rules();
        for (int sweep = 0; sweep < 4; ++sweep) {
            for (std::size_t s = 0; s < inst.services.size(); ++s) {
                auto m = e.find_match(s);
                if (!m) continue;
                const auto objects = e.knowledge().object_count();
                const std::vector<Triple> before(e.knowledge().triples().begin(), e.knowledge().triples().end());
                e.call_service(s, *m);
                e.apply_inference_rules();
                ASSERT_GE(e.knowledge().object_count(), objects);
                for (const auto& t : before) ASSERT_TRUE(e.knowledge().holds(t));
            }
        }
    }
}

TEST(MonotoneKnowledge, ObjectOrientedLearnedPairsOnlyGrow) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        gen::GenConfig cfg;
        cfg.seed = seed;
        cfg.concept_count = 12;
        cfg.property_count = 15;
        cfg.num_web_services = 30;
        auto inst = io::parse_oo(gen::generate_oo_instance(cfg).instance);
        OOEngine e(inst);
        e.call_init();
        std::vector<bool> was_callable(inst.services.size(), false);
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (std::size_t s = 0; s < inst.services.size(); ++s) {
                for (std::size_t t = 0; t < inst.services.size(); ++t) {
                    if (was_callable[t]) {
                        ASSERT_TRUE(e.callable(t));
                    }
                    was_callable[t] = e.callable(t);
                }
                if (!e.callable(s)) continue;
                const auto pairs = e.learned_pairs();
                e.call_web_service(s);
                ASSERT_GE(e.learned_pairs(), pairs);
            }
        }
    }
}

// ---- reduction preserves validity ----

TEST(Reduction, NamePaddedCompositionsStayValid) {
    std::mt19937_64 rng(33);
    int checked = 0;
    for (int round = 0; round < 500; ++round) {
        auto small = oracle::random_small_instance(rng, 2 + rng() % 7, 9);
        auto problem = io::parse_name(oracle::to_instance_json(small));
        auto comp = find_composition(problem.repo, problem.request, {.use_scores = true, .reduce = false});
        if (!comp) continue;
        // Pad with every service that is already callable at the end.
        ParamSet known = problem.request.init;
        for (const auto* s : resolve_calls(problem.repo, comp->calls)) known = set_union(known, s->outputs);
        Composition padded = *comp;
        for (const auto& s : problem.repo.services())
            if (is_subset(s.inputs, known)) padded.calls.push_back(s.name);
        ASSERT_TRUE(validate_composition(problem.repo, problem.request, padded).valid);
        auto reduced = reduce_to_fixpoint(problem.repo, problem.request, padded);
        EXPECT_TRUE(validate_composition(problem.repo, problem.request, reduced).valid) << "round " << round;
        EXPECT_LE(reduced.length(), padded.length());
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Reduction, HierarchicalReducedStaysValid) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        gen::GenConfig cfg;
        cfg.seed = seed;
        auto inst = io::parse_hierarchical(gen::generate_hierarchical_instance(cfg).instance);
        auto full = find_composition_hierarchical(inst, {.use_scores = true, .reduce = false});
        auto reduced = find_composition_hierarchical(inst, {.use_scores = true, .reduce = true});
        ASSERT_TRUE(full && reduced);
        EXPECT_TRUE(validate_hierarchical(inst, *full).valid);
        EXPECT_TRUE(validate_hierarchical(inst, *reduced).valid);
        EXPECT_LE(reduced->length(), full->length());
        EXPECT_LE(execution_path(*reduced), execution_path(*full));
    }
}

TEST(Reduction, ObjectOrientedReducedStaysValid) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        gen::GenConfig cfg;
        cfg.seed = seed;
        cfg.concept_count = 10;
        cfg.property_count = 10;
        cfg.num_web_services = 20;
        auto inst = io::parse_oo(gen::generate_oo_instance(cfg).instance);
        auto full = find_comp(inst);
        ASSERT_TRUE(full);
        auto reduced = reduce_oo(inst, *full);
        EXPECT_TRUE(validate_oo(inst, *full).valid);
        EXPECT_TRUE(validate_oo(inst, reduced).valid);
        EXPECT_LE(reduced.length(), full->length());
    }
}

// ---- rule fixpoint ----

struct RandomRuleWorld {
    Json instance;
    std::vector<oracle::NaiveRule> rules;
    std::set<oracle::NaiveTriple> facts;
    int objects = 0;
};

RandomRuleWorld random_rule_world(std::mt19937_64& rng) {
    RandomRuleWorld w;
    w.objects = 2 + static_cast<int>(rng() % 11);  // at most 12
    const int relations = 1 + static_cast<int>(rng() % 3);
    auto rel_name = [](int r) { return "r" + std::to_string(r); };
    auto obj_name = [](int o) { return "o" + std::to_string(o); };
    auto var_name = [](int v) { return "V" + std::to_string(v); };

    Json rel_decls = Json::array();
    for (int r = 0; r < relations; ++r) rel_decls.push_back({{"name", rel_name(r)}});

    Json rule_decls = Json::array();
    const int rule_count = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < rule_count; ++k) {
        oracle::NaiveRule rule;
        rule.vars = 2 + static_cast<int>(rng() % 2);
        // A chain of atoms mentions every variable.
        for (int v = 0; v + 1 < rule.vars; ++v)
            rule.pre.push_back({static_cast<int>(rng() % relations), v, v + 1});
        if (rng() % 2) rule.pre.push_back({static_cast<int>(rng() % relations), static_cast<int>(rng() % rule.vars),
                                           static_cast<int>(rng() % rule.vars)});
        rule.eff.push_back({static_cast<int>(rng() % relations), 0, rule.vars - 1});
        Json params = Json::array(), pre = Json::array(), eff = Json::array();
        for (int v = 0; v < rule.vars; ++v) params.push_back(var_name(v));
        for (const auto& a : rule.pre) pre.push_back({rel_name(a.relation), var_name(a.first), var_name(a.second)});
        for (const auto& a : rule.eff) eff.push_back({rel_name(a.relation), var_name(a.first), var_name(a.second)});
        rule_decls.push_back({{"name", "rule" + std::to_string(k)}, {"params", params}, {"pre", pre}, {"eff", eff}});
        w.rules.push_back(std::move(rule));
    }

    Json known = Json::array(), rel = Json::array();
    for (int o = 0; o < w.objects; ++o) known.push_back({{"name", obj_name(o)}, {"type", "T"}});
    const int fact_count = static_cast<int>(rng() % (2 * w.objects + 1));
    for (int f = 0; f < fact_count; ++f) {
        const int r = static_cast<int>(rng() % relations), a = static_cast<int>(rng() % w.objects),
                  b = static_cast<int>(rng() % w.objects);
        if (w.facts.insert({r, a, b}).second) rel.push_back({rel_name(r), obj_name(a), obj_name(b)});
    }

    w.instance = Json{{"model", "relational"},
                      {"taxonomy", {{"concepts", {{{"name", "T"}}}}}},
                      {"relations", rel_decls},
                      {"rules", rule_decls},
                      {"services", Json::array()},
                      {"query", {{"known", known}, {"required", Json::array()}, {"rel", rel}}}};
    return w;
}

TEST(RuleFixpoint, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(44);
    for (int round = 0; round < 120; ++round) {
        auto w = random_rule_world(rng);
        auto inst = io::parse_relational(w.instance);
        RelationalEngine e(inst);
        e.seed();
        e.apply_inference_rules();
        EXPECT_EQ(e.apply_inference_rules(), 0u) << "second pass must find nothing new";

        auto expected = oracle::rule_fixpoint(w.facts, w.rules, w.objects);
        std::vector<std::uint32_t> id(static_cast<std::size_t>(w.objects));
        for (int o = 0; o < w.objects; ++o) id[static_cast<std::size_t>(o)] = *e.knowledge().find_object("o" + std::to_string(o));
        std::set<oracle::NaiveTriple> actual;
        for (const auto& t : e.knowledge().triples()) {
            auto pos = std::find(id.begin(), id.end(), t.first) - id.begin();
            auto pos2 = std::find(id.begin(), id.end(), t.second) - id.begin();
            actual.insert({static_cast<int>(t.relation), static_cast<int>(pos), static_cast<int>(pos2)});
        }
        ASSERT_EQ(actual, expected) << "round " << round;

        // Every binding the enumeration accepts is one the engine reports.
        for (std::size_t r = 0; r < w.rules.size(); ++r) {
            const auto& naive = w.rules[r];
            std::size_t count = 0;
            std::vector<int> a(static_cast<std::size_t>(naive.vars), 0);
            while (true) {
                count += std::all_of(naive.pre.begin(), naive.pre.end(), [&](const oracle::NaiveAtom& p) {
                    return expected.contains({p.relation, a[static_cast<std::size_t>(p.first)],
                                              a[static_cast<std::size_t>(p.second)]});
                });
                std::size_t k = 0;
                while (k < a.size() && ++a[k] == w.objects) a[k++] = 0;
                if (k == a.size()) break;
            }
            EXPECT_EQ(e.all_rule_bindings(inst.rules[r]).size(), count) << "round " << round << " rule " << r;
        }
    }
}

// ---- online usages ----

TEST(OnlineUsages, ConsistentThroughGeneratedScenarios) {
    for (bool async : {false, true}) {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            gen::GenConfig cfg;
            cfg.seed = seed;
            cfg.num_web_services = 80;
            cfg.num_parameters = 800;
            cfg.query_count = 5;
            cfg.pars_per_service = 3;
            cfg.num_ws_in_solution = 5;
            auto g = gen::generate_online_scenario(cfg);
            OnlineSession session({.reoptimize = false, .async_backups = async});
            for (const auto& op : g.events) {
                session.apply(op);
                session.finish();
                ASSERT_TRUE(session.state().usages_consistent()) << "seed " << seed << " op " << op.dump();
                ASSERT_TRUE(session.state().solutions_valid()) << "seed " << seed << " op " << op.dump();
            }
        }
    }
}

// ---- determinism ----

TEST(Determinism, GeneratorsRepeatByteForByte) {
    for (auto model : {io::Model::name, io::Model::hierarchical, io::Model::relational, io::Model::oo,
                       io::Model::online}) {
        for (std::uint64_t seed : {1u, 7u, 123456789u}) {
            gen::GenConfig cfg;
            cfg.seed = seed;
            auto a = gen::generate(model, cfg), b = gen::generate(model, cfg);
            ASSERT_EQ(a.instance.dump(), b.instance.dump());
            ASSERT_EQ(gen::to_json(a.truth).dump(), gen::to_json(b.truth).dump());
            ASSERT_EQ(a.events.size(), b.events.size());
            for (std::size_t i = 0; i < a.events.size(); ++i) ASSERT_EQ(a.events[i].dump(), b.events[i].dump());
        }
    }
}

TEST(Determinism, SolverOutputRepeats) {
    for (auto model : {io::Model::name, io::Model::hierarchical, io::Model::relational, io::Model::oo}) {
        gen::GenConfig cfg;
        cfg.seed = 5;
        auto g = gen::generate(model, cfg);
        Json a, b;
        cli::solve_instance(g.instance, {}, &a);
        cli::solve_instance(g.instance, {}, &b);
        EXPECT_EQ(a.dump(), b.dump()) << io::model_tag(model);
    }
}

}  // namespace
}  // namespace wsc

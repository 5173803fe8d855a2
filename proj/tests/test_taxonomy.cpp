#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "wsc/io.hpp"
#include "wsc/taxonomy.hpp"

namespace wsc {
namespace {

HierInstance verb_synonym() { return io::parse_hierarchical(test::fixture("hierarchical.json")); }

TEST(EulerIndex, SingleConcept) {
    Taxonomy tax({{"only", std::nullopt}});
    auto idx = build_euler_index(tax);
    EXPECT_EQ(idx.entry(ConceptId{0}), 1u);
    EXPECT_EQ(idx.exit(ConceptId{0}), 2u);
}

TEST(EulerIndex, ChainIntervalsNest) {
    Taxonomy tax({{"root", std::nullopt}, {"a", "root"}, {"b", "a"}});
    auto idx = build_euler_index(tax);
    auto r = tax.concept_at("root"), a = tax.concept_at("a"), b = tax.concept_at("b");
    EXPECT_LT(idx.entry(a), idx.entry(b));
    EXPECT_GT(idx.exit(a), idx.exit(b));
    EXPECT_LT(idx.entry(r), idx.entry(a));
    EXPECT_GT(idx.exit(r), idx.exit(a));
    EXPECT_TRUE(idx.is_subtype(b, r));
    EXPECT_FALSE(idx.is_subtype(r, b));
}

TEST(EulerIndex, CycleRejected) {
    EXPECT_THROW(build_euler_index(Taxonomy(std::vector<ConceptDecl>{{"a", "b"}, {"b", "a"}})), TaxonomyError);
}

TEST(EulerIndex, SubtreeIsContiguous) {
    auto inst = verb_synonym();
    auto word = inst.taxonomy.concept_at("word");
    auto sub = inst.index.subtree(word);
    EXPECT_EQ(sub.size(), 6u);  // word, partOfSpeech, verb, noun, adjective, synonym
    for (auto c : sub) EXPECT_TRUE(inst.index.is_subtype(c, word));
}

TEST(Taxonomy, UnknownParentRejected) {
    EXPECT_THROW(Taxonomy(std::vector<ConceptDecl>{{"a", "missing"}}), TaxonomyError);
}

TEST(Subsumes, VerbStandsInForWord) {
    auto inst = verb_synonym();
    auto verb = inst.taxonomy.instance_at("aVerb"), word = inst.taxonomy.instance_at("aWord");
    EXPECT_TRUE(subsumes(inst.taxonomy, inst.index, verb, word));
    EXPECT_FALSE(subsumes(inst.taxonomy, inst.index, word, verb));
}

TEST(Subsumes, IncomparableBranches) {
    Taxonomy tax({{"string", std::nullopt},
                  {"word", "string"},
                  {"synonym", "word"},
                  {"stringToken", "string"},
                  {"substr", "stringToken"}},
                 {{"s1", "substr"}, {"s2", "synonym"}});
    auto idx = build_euler_index(tax);
    EXPECT_FALSE(subsumes(tax, idx, tax.instance_at("s1"), tax.instance_at("s2")));
    EXPECT_FALSE(subsumes(tax, idx, tax.instance_at("s2"), tax.instance_at("s1")));
}

TEST(SubsumesSet, EveryRequiredNeedsAWitness) {
    auto inst = verb_synonym();
    auto& t = inst.taxonomy;
    std::vector<InstanceId> known{t.instance_at("aVerb")};
    std::vector<InstanceId> word{t.instance_at("aWord")};
    std::vector<InstanceId> word_and_phrase{t.instance_at("aWord"), t.instance_at("aPhrase")};
    EXPECT_TRUE(subsumes_set(t, inst.index, known, word));
    EXPECT_FALSE(subsumes_set(t, inst.index, known, word_and_phrase));
    EXPECT_TRUE(subsumes_set(t, inst.index, known, {}));
}

TEST(Subsumes, AgreesWithClosureOnRandomForests) {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 5; ++round) {
        auto parent = oracle::random_forest(rng, 200 + rng() % 300);
        Taxonomy tax(oracle::forest_decls(parent));
        auto idx = build_euler_index(tax);
        oracle::AncestorClosure closure(parent);
        for (std::size_t a = 0; a < parent.size(); ++a)
            for (std::size_t b = 0; b < parent.size(); ++b)
                ASSERT_EQ(idx.is_subtype(tax.concept_at("c" + std::to_string(a)), tax.concept_at("c" + std::to_string(b))),
                          closure.is_a(a, b));
    }
}

TEST(HierarchicalSearch, VerbSynonymExample) {
    auto inst = verb_synonym();
    auto c = find_composition_hierarchical(inst);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->calls, (std::vector<std::string>{"extractMainVerb", "getSynonym", "stringReplace"}));
    EXPECT_EQ(execution_path(*c), 3u);
    EXPECT_TRUE(validate_hierarchical(inst, *c).valid);
}

TEST(HierarchicalSearch, GoalSubsumedByInitIsEmpty) {
    auto inst = verb_synonym();
    // A phrase instance already stands in for a generic string.
    inst.request.goal = {inst.taxonomy.instance_at("aString")};
    auto c = find_composition_hierarchical(inst);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->length(), 0u);
    EXPECT_EQ(execution_path(*c), 0u);
}

TEST(HierarchicalSearch, NoProducerIsAbsent) {
    auto inst = verb_synonym();
    // Every service needs some input, so nothing is callable.
    inst.request.init = {};
    inst.request.goal = {inst.taxonomy.instance_at("aVerb")};
    EXPECT_FALSE(find_composition_hierarchical(inst));
}

TEST(ExecutionPath, EmptyIsZero) { EXPECT_EQ(execution_path(Composition{}), 0u); }

TEST(Validate, LayerMayNotUseSameLayerOutputs) {
    auto inst = verb_synonym();
    Composition c{{"extractMainVerb", "getSynonym", "stringReplace"},
                  std::vector<std::vector<std::string>>{{"extractMainVerb", "getSynonym"}, {"stringReplace"}}};
    auto r = validate_hierarchical(inst, c);
    EXPECT_FALSE(r.valid);
    ASSERT_TRUE(r.violation_position);
    EXPECT_EQ(*r.violation_position, 2u);
}

TEST(Relayer, PlacesCallsAtEarliestLayer) {
    auto inst = verb_synonym();
    auto c = relayer(inst, {"extractMainVerb", "getSynonym", "stringReplace"});
    ASSERT_TRUE(c.layers);
    EXPECT_EQ(c.layers->size(), 3u);
}

// Minimal execution path equals the layer at which plain forward closure
// first covers the goal.
TEST(HierarchicalSearch, PathMatchesForwardClosureLayer) {
    std::mt19937_64 rng(5);
    int solved = 0;
    for (int round = 0; round < 60; ++round) {
        auto parent = oracle::random_forest(rng, 30);
        auto decls = oracle::forest_decls(parent);
        std::vector<InstanceDecl> insts;
        for (std::size_t i = 0; i < parent.size(); ++i) insts.push_back({"i" + std::to_string(i), decls[i].name});
        HierInstance inst;
        inst.taxonomy = Taxonomy(decls, insts);
        inst.index = build_euler_index(inst.taxonomy);
        oracle::AncestorClosure closure(parent);
        auto pick = [&] { return InstanceId{static_cast<std::uint32_t>(rng() % parent.size())}; };
        for (int s = 0; s < 12; ++s) {
            HierService svc{"s" + std::to_string(s), {pick()}, {pick(), pick()}};
            if (rng() % 2) svc.inputs.push_back(pick());
            inst.repo.add(std::move(svc));
        }
        inst.request.init = {pick(), pick()};
        inst.request.goal = {pick()};

        auto covered = [&](const std::vector<InstanceId>& known, InstanceId need) {
            return std::any_of(known.begin(), known.end(),
                               [&](InstanceId k) { return closure.is_a(k.value, need.value); });
        };
        auto covers_all = [&](const std::vector<InstanceId>& known, const std::vector<InstanceId>& need) {
            return std::all_of(need.begin(), need.end(), [&](InstanceId n) { return covered(known, n); });
        };
        std::vector<InstanceId> known = inst.request.init;
        std::optional<std::size_t> layer = covers_all(known, inst.request.goal) ? std::optional<std::size_t>(0) : std::nullopt;
        std::vector<char> fired(inst.repo.size(), 0);
        for (std::size_t depth = 1; !layer; ++depth) {
            std::vector<InstanceId> next = known;
            bool progress = false;
            for (std::size_t i = 0; i < inst.repo.size(); ++i) {
                const auto& svc = inst.repo.services()[i];
                if (fired[i] || !covers_all(known, svc.inputs)) continue;
                fired[i] = 1;
                progress = true;
                next.insert(next.end(), svc.outputs.begin(), svc.outputs.end());
            }
            if (!progress) break;
            known = std::move(next);
            if (covers_all(known, inst.request.goal)) layer = depth;
        }

        auto c = find_composition_hierarchical(inst);
        ASSERT_EQ(c.has_value(), layer.has_value()) << "round " << round;
        if (!c) continue;
        ++solved;
        EXPECT_TRUE(validate_hierarchical(inst, *c).valid);
        EXPECT_EQ(execution_path(*c), *layer) << "round " << round;
    }
    EXPECT_GT(solved, 5);
}

}  // namespace
}  // namespace wsc

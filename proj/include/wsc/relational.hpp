#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "wsc/taxonomy.hpp"

namespace wsc {

// ---- declarations (as loaded) ----

struct RelationDecl {
    std::string name;
    bool transitive = false;
    bool symmetric = false;
};

struct RelAtomDecl {
    std::string relation;
    std::string first;
    std::string second;
};

struct RelParamDecl {
    std::string name;
    std::string type;
};

struct RuleDecl {
    std::string name;
    std::vector<std::string> params;
    std::vector<RelAtomDecl> pre;
    std::vector<RelAtomDecl> eff;
};

struct RelServiceDecl {
    std::string name;
    std::vector<RelParamDecl> inputs;
    std::vector<RelParamDecl> outputs;
    std::vector<RelAtomDecl> relations;
};

struct RelQueryDecl {
    std::vector<RelParamDecl> known;
    std::vector<RelParamDecl> required;
    std::vector<RelAtomDecl> relations;
};

struct RelInstanceDecl {
    std::vector<ConceptDecl> concepts;
    std::vector<RelationDecl> relations;
    std::vector<RuleDecl> rules;
    std::vector<RelServiceDecl> services;
    RelQueryDecl query;
};

// ---- compiled form ----

// Relation between two slots of a service or rule. Service slots number the
// inputs first, then the outputs.
struct SlotAtom {
    std::uint32_t relation = 0;
    std::uint32_t first = 0;
    std::uint32_t second = 0;
};

struct RelService {
    std::string name;
    std::vector<std::string> slot_names;     // inputs then outputs
    std::vector<ConceptId> slot_types;
    std::size_t input_count = 0;
    std::vector<SlotAtom> preconditions;     // both slots are inputs
    std::vector<SlotAtom> effects;

    std::size_t output_count() const { return slot_names.size() - input_count; }
};

struct Rule {
    std::string name;
    std::vector<std::string> vars;
    std::vector<SlotAtom> pre;
    std::vector<SlotAtom> eff;
    bool internal = false;  // compiled from a relation property
};

class RelOntology {
public:
    RelOntology() = default;
    RelOntology(Taxonomy tax, std::vector<RelationDecl> relations);

    const Taxonomy& taxonomy() const { return tax_; }
    const EulerIndex& index() const { return index_; }
    std::span<const RelationDecl> relations() const { return relations_; }
    std::optional<std::uint32_t> find_relation(std::string_view name) const;
    std::uint32_t relation_at(std::string_view name) const;
    bool is_subtype(ConceptId sub, ConceptId general) const { return index_.is_subtype(sub, general); }

private:
    Taxonomy tax_;
    EulerIndex index_;
    std::vector<RelationDecl> relations_;
    std::unordered_map<std::string, std::uint32_t> by_name_;
};

struct RelInstance {
    RelOntology ontology;
    std::vector<Rule> rules;  // user rules first, then internal property rules
    std::vector<RelService> services;
    std::unordered_map<std::string, std::size_t> service_index;
    RelService seed;  // no inputs; outputs are the known query objects
    RelService goal;  // inputs: known slots (pinned), then required slots

    std::size_t user_rule_count() const;
    const RelService* find_service(std::string_view name) const;
    const Rule* find_rule(std::string_view name) const;
};

// Throws TaxonomyError / std::invalid_argument on malformed declarations.
RelInstance compile_relational(const RelInstanceDecl& decl);

// ---- knowledge ----

struct ObjectRef {
    std::string id;
    ConceptId type;
};

struct Triple {
    std::uint32_t relation = 0;
    std::uint32_t first = 0;
    std::uint32_t second = 0;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

class KnowledgeState {
public:
    KnowledgeState() = default;
    KnowledgeState(const RelOntology& ontology);

    std::uint32_t add_object(std::string id, ConceptId type);
    bool add_triple(Triple t);  // false if already present
    bool holds(Triple t) const;
    std::optional<std::uint32_t> triple_index(Triple t) const;

    std::size_t object_count() const { return objects_.size(); }
    const ObjectRef& object(std::uint32_t i) const { return objects_[i]; }
    std::optional<std::uint32_t> find_object(std::string_view id) const;
    std::span<const Triple> triples() const { return triples_; }

    // Objects x with relation(x, o) / relation(o, x).
    std::span<const std::uint32_t> sources(std::uint32_t relation, std::uint32_t o) const;
    std::span<const std::uint32_t> targets(std::uint32_t relation, std::uint32_t o) const;
    // Objects whose type is exactly c.
    std::span<const std::uint32_t> objects_of(ConceptId c) const;

private:
    static std::uint64_t key(Triple t);
    std::vector<ObjectRef> objects_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::vector<std::vector<std::uint32_t>> by_type_;
    std::vector<Triple> triples_;
    std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> triple_ids_;  // per relation
    std::vector<std::vector<std::vector<std::uint32_t>>> out_;                   // [relation][object]
    std::vector<std::vector<std::vector<std::uint32_t>>> in_;
};

// Binding of slots to object indices; the vector itself is the call digest.
struct MatchAssignment {
    std::vector<std::uint32_t> objects;
    friend auto operator<=>(const MatchAssignment&, const MatchAssignment&) = default;
};

std::uint64_t digest_hash(const MatchAssignment& m);

struct RelSearchOptions {
    bool use_rules = true;
    std::size_t object_cap = 4;
    bool both_orientations = false;  // check any relation in either direction
    std::size_t goal_binding_limit = 256;
};

struct RelCallStep {
    std::string service;
    std::vector<std::pair<std::string, std::string>> bindings;  // param -> object id
    std::vector<std::pair<std::string, std::string>> outputs;
};

struct RelRuleStep {
    std::string rule;
    std::vector<std::pair<std::string, std::string>> bindings;
};

using RelStep = std::variant<RelCallStep, RelRuleStep>;

struct RelComposition {
    std::vector<RelStep> steps;
    std::vector<std::pair<std::string, std::string>> goal_binding;

    std::size_t service_calls() const;
    std::size_t rule_applications() const;
    std::size_t length() const { return service_calls(); }
};

// Search state over one instance; exposes the individual algorithm steps.
class RelationalEngine {
public:
    RelationalEngine(const RelInstance& inst, RelSearchOptions options = {});

    const KnowledgeState& knowledge() const { return knowledge_; }

    // Calls the seed service and closes the knowledge.
    void seed();
    std::optional<MatchAssignment> find_match(std::size_t service) const;
    void call_service(std::size_t service, const MatchAssignment& m);
    // Applies user rules (when enabled) and property rules to fixpoint.
    // Returns the number of new user-rule applications.
    std::size_t apply_inference_rules();
    // Enumerates goal bindings (known slots pinned), up to a limit.
    std::vector<MatchAssignment> goal_matches(std::size_t limit) const;
    bool goal_matched() const { return !goal_matches(1).empty(); }

    // Builds the minimal dependency-closed composition for a goal binding.
    RelComposition extract(const MatchAssignment& goal) const;
    std::size_t calls_made() const;

    // Every binding (over all objects) satisfying the rule's preconditions.
    std::vector<MatchAssignment> all_rule_bindings(const Rule& rule) const;
    bool rule_seen(std::size_t rule, const MatchAssignment& m) const;

private:
    struct Step {
        bool is_rule = false;
        std::size_t index = 0;  // service or rule
        MatchAssignment binding;
        std::vector<std::uint32_t> created;
        std::vector<std::uint32_t> premises;  // triple indices
    };
    struct TripleOrigin {
        std::int64_t step = -1;  // -1: seed or property closure
        std::vector<std::uint32_t> premises;
    };

    template <typename Visit>
    void enumerate(const std::vector<std::optional<ConceptId>>& types, const std::vector<SlotAtom>& atoms,
                   const std::vector<std::optional<std::uint32_t>>& pinned, Visit&& visit) const;
    std::vector<std::uint32_t> premise_triples(const std::vector<SlotAtom>& atoms, const MatchAssignment& m) const;
    void add_effects(const std::vector<SlotAtom>& atoms, const std::vector<std::uint32_t>& slots, std::int64_t step,
                     const std::vector<std::uint32_t>& premises);
    std::size_t apply_rules(bool include_user);
    std::vector<std::uint32_t> cap_key(std::size_t service, const MatchAssignment& m) const;

    const RelInstance& inst_;
    RelSearchOptions options_;
    KnowledgeState knowledge_;
    std::vector<std::set<MatchAssignment>> service_history_;
    std::vector<std::set<MatchAssignment>> rule_history_;
    std::map<std::pair<std::size_t, std::vector<std::uint32_t>>, std::size_t> rounds_;
    std::vector<std::size_t> call_ordinal_;
    std::vector<Step> steps_;
    std::vector<TripleOrigin> origins_;
    std::vector<std::int64_t> creator_;  // per object: step index or -1
    std::vector<std::uint32_t> seed_objects_;
};

std::optional<RelComposition> search_composition_relational(const RelInstance& inst, RelSearchOptions options = {});

struct RelValidationReport {
    bool valid = false;
    std::optional<std::size_t> violation_position;  // 1-based
    std::string reason;
    bool goal_covered = false;
};

// Replays the steps on fresh knowledge, closing relation properties
// algebraically instead of through rules.
RelValidationReport validate_relational(const RelInstance& inst, const RelComposition& comp,
                                        bool both_orientations = false);

// Symmetric/transitive closure computed directly on the triple set.
void close_properties(KnowledgeState& k, const RelOntology& ontology);

}  // namespace wsc

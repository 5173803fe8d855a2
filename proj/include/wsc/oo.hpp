#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsc/taxonomy.hpp"

namespace wsc {

struct PropertyId {
    std::uint32_t value = 0;
    friend auto operator<=>(PropertyId, PropertyId) = default;
};

struct PropDecl {
    std::string name;
    std::string type;
};

struct OOConceptDecl {
    std::string name;
    std::optional<std::string> parent;
    std::vector<PropDecl> props;
};

// Concept forest whose properties are inherited by every descendant.
class ConceptTree {
public:
    ConceptTree() = default;
    explicit ConceptTree(const std::vector<OOConceptDecl>& concepts);

    const Taxonomy& taxonomy() const { return tax_; }
    const EulerIndex& index() const { return index_; }
    std::size_t property_count() const { return prop_names_.size(); }
    const std::string& property_name(PropertyId p) const { return prop_names_.at(p.value); }
    const std::string& property_type(PropertyId p) const { return prop_types_.at(p.value); }
    std::optional<PropertyId> find_property(std::string_view name) const;
    PropertyId property_at(std::string_view name) const;
    // Most general concept declaring p.
    ConceptId definer(PropertyId p) const { return definer_.at(p.value); }

    bool is_a(ConceptId sub, ConceptId general) const { return index_.is_subtype(sub, general); }
    bool has(ConceptId c, PropertyId p) const { return index_.is_subtype(c, definer_.at(p.value)); }
    // Own and inherited properties, sorted.
    std::vector<PropertyId> properties(ConceptId c) const;

private:
    Taxonomy tax_;
    EulerIndex index_;
    std::vector<std::string> prop_names_;
    std::vector<std::string> prop_types_;
    std::vector<ConceptId> definer_;
    std::unordered_map<std::string, PropertyId> prop_by_name_;
};

struct PartialConcept {
    ConceptId concept_id;
    std::vector<PropertyId> props;  // sorted, subset of properties(concept_id)
};

struct OOService {
    std::string name;
    std::vector<PartialConcept> inputs;
    std::vector<PartialConcept> outputs;
};

struct OOQuery {
    std::vector<PartialConcept> known;
    std::vector<PartialConcept> required;
};

struct OOInstance {
    ConceptTree tree;
    std::vector<OOService> services;
    std::unordered_map<std::string, std::size_t> service_index;
    OOQuery query;

    const OOService* find_service(std::string_view name) const;
};

// Validates props against the tree and indexes services by name.
OOInstance make_oo_instance(ConceptTree tree, std::vector<OOService> services, OOQuery query);

// Property-learner state. Service index services.size() denotes Goal.
class OOEngine {
public:
    explicit OOEngine(const OOInstance& inst);

    std::size_t goal_index() const { return inst_.services.size(); }
    bool callable(std::size_t service) const { return remaining_count_.at(service) == 0; }
    bool goal_callable() const { return callable(goal_index()); }

    // Learns the Init outputs.
    void call_init();
    void call_web_service(std::size_t service);

    bool known(ConceptId c, PropertyId p) const;
    bool concept_known(ConceptId c) const { return concept_known_.at(c.value); }
    std::map<ConceptId, std::set<PropertyId>> remaining(std::size_t service) const;
    bool presence_pending(std::size_t service, ConceptId c) const;
    // Number of (concept, property) pairs learned so far.
    std::size_t learned_pairs() const { return known_.size(); }
    // Number of per-service bookkeeping updates performed.
    std::size_t index_updates() const { return index_updates_; }

    // Services that became callable since the last call; cleared on read.
    std::vector<std::size_t> take_newly_callable();

private:
    static std::uint64_t key(ConceptId c, PropertyId p) { return (std::uint64_t{c.value} << 32) | p.value; }
    void learn(const std::vector<PartialConcept>& outputs);
    void satisfy(std::size_t service);

    const OOInstance& inst_;
    std::unordered_map<std::uint64_t, char> known_;
    std::vector<char> concept_known_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> required_;
    std::vector<std::vector<std::size_t>> presence_required_;
    std::vector<std::map<ConceptId, std::set<PropertyId>>> remaining_props_;
    std::vector<std::set<ConceptId>> remaining_presence_;
    std::vector<std::size_t> remaining_count_;
    std::vector<std::size_t> newly_callable_;
    std::size_t index_updates_ = 0;
};

struct OOSearchOptions {
    bool reduce = false;
};

std::optional<Composition> find_comp(const OOInstance& inst, OOSearchOptions options = {});

// Usefulness sweep over (concept, property) items and presence markers,
// repeated until nothing is removed.
Composition reduce_oo(const OOInstance& inst, const Composition& comp);

struct OOValidationReport {
    bool valid = false;
    std::optional<std::size_t> violation_position;  // 1-based
    bool goal_covered = false;
};

// Applies the matching definition and the learning formula directly.
OOValidationReport validate_oo(const OOInstance& inst, const Composition& comp);

}  // namespace wsc

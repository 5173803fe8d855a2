#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsc/core.hpp"

namespace wsc {

struct ConceptId {
    std::uint32_t value = 0;
    friend auto operator<=>(ConceptId, ConceptId) = default;
};

struct InstanceId {
    std::uint32_t value = 0;
    friend auto operator<=>(InstanceId, InstanceId) = default;
};

struct ConceptDecl {
    std::string name;
    std::optional<std::string> parent;
};

struct InstanceDecl {
    std::string name;
    std::string concept_name;
};

class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Concept forest plus instances. Only parent pointers are stored; transitive
// questions go through EulerIndex.
class Taxonomy {
public:
    Taxonomy() = default;
    Taxonomy(const std::vector<ConceptDecl>& concepts, const std::vector<InstanceDecl>& instances = {});

    std::size_t concept_count() const { return concept_names_.size(); }
    std::size_t instance_count() const { return instance_names_.size(); }

    const std::string& concept_name(ConceptId c) const { return concept_names_.at(c.value); }
    const std::string& instance_name(InstanceId i) const { return instance_names_.at(i.value); }
    std::optional<ConceptId> parent(ConceptId c) const;
    std::span<const ConceptId> children(ConceptId c) const { return children_.at(c.value); }
    std::span<const ConceptId> roots() const { return roots_; }
    ConceptId concept_of(InstanceId i) const { return instance_concept_.at(i.value); }

    std::optional<ConceptId> find_concept(std::string_view name) const;
    std::optional<InstanceId> find_instance(std::string_view name) const;
    ConceptId concept_at(std::string_view name) const;
    InstanceId instance_at(std::string_view name) const;

private:
    std::vector<std::string> concept_names_;
    std::vector<std::int64_t> parent_;  // -1 for roots
    std::vector<std::vector<ConceptId>> children_;
    std::vector<ConceptId> roots_;
    std::unordered_map<std::string, ConceptId> concept_by_name_;
    std::vector<std::string> instance_names_;
    std::vector<ConceptId> instance_concept_;
    std::unordered_map<std::string, InstanceId> instance_by_name_;
};

// Depth-first entry/exit stamps; interval nesting answers ancestor queries in O(1).
class EulerIndex {
public:
    std::uint32_t entry(ConceptId c) const { return entry_.at(c.value); }
    std::uint32_t exit(ConceptId c) const { return exit_.at(c.value); }

    // True iff sub is general or a (possibly indirect) descendant of general.
    bool is_subtype(ConceptId sub, ConceptId general) const {
        return entry_[general.value] <= entry_[sub.value] && entry_[sub.value] < exit_[general.value];
    }

    // Concepts in order of entry time; every subtree is a contiguous slice.
    std::span<const ConceptId> preorder() const { return preorder_; }
    std::span<const ConceptId> subtree(ConceptId c) const;

private:
    friend EulerIndex build_euler_index(const Taxonomy& tax);
    std::vector<std::uint32_t> entry_;
    std::vector<std::uint32_t> exit_;
    std::vector<ConceptId> preorder_;
    std::vector<std::uint32_t> preorder_pos_;
    std::vector<std::uint32_t> subtree_size_;
};

// Throws TaxonomyError when parent links form a cycle.
EulerIndex build_euler_index(const Taxonomy& tax);

bool subsumes(const Taxonomy& tax, const EulerIndex& index, InstanceId specific, InstanceId general);
bool subsumes_set(const Taxonomy& tax, const EulerIndex& index, std::span<const InstanceId> known,
                  std::span<const InstanceId> required);

struct HierService {
    std::string name;
    std::vector<InstanceId> inputs;
    std::vector<InstanceId> outputs;
};

struct HierRequest {
    std::vector<InstanceId> init;
    std::vector<InstanceId> goal;
};

class HierRepository {
public:
    HierRepository() = default;
    explicit HierRepository(std::vector<HierService> services);
    void add(HierService service);
    const HierService* find(std::string_view name) const;
    const HierService& at(std::string_view name) const;
    std::span<const HierService> services() const { return services_; }
    std::size_t size() const { return services_.size(); }

private:
    std::vector<HierService> services_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

// A hierarchical problem with its index built once.
struct HierInstance {
    Taxonomy taxonomy;
    EulerIndex index;
    HierRepository repo;
    HierRequest request;
};

struct HierValidationReport {
    bool valid = false;
    std::optional<std::size_t> violation_position;  // 1-based
    std::vector<InstanceId> missing;
    bool goal_covered = false;
};

HierValidationReport validate_hierarchical(const HierInstance& inst, const Composition& comp);

struct HierSearchOptions {
    bool use_scores = true;
    bool reduce = true;
};

// Layered search; the returned composition always carries layers.
std::optional<Composition> find_composition_hierarchical(const HierInstance& inst,
                                                         HierSearchOptions options = {});

std::size_t execution_path(const Composition& comp);

// Places every call at the earliest layer its inputs allow. Calls must form a
// valid sequence for the request.
Composition relayer(const HierInstance& inst, const std::vector<std::string>& calls);

}  // namespace wsc

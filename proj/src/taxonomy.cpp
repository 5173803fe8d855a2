#include "wsc/taxonomy.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "wsc/name_engine.hpp"

namespace wsc {

Taxonomy::Taxonomy(const std::vector<ConceptDecl>& concepts, const std::vector<InstanceDecl>& instances) {
    for (const auto& decl : concepts) {
        if (decl.name.empty()) throw TaxonomyError("concept name must be nonempty");
        ConceptId id{static_cast<std::uint32_t>(concept_names_.size())};
        if (!concept_by_name_.emplace(decl.name, id).second)
            throw TaxonomyError("duplicate concept: " + decl.name);
        concept_names_.push_back(decl.name);
    }
    parent_.assign(concepts.size(), -1);
    children_.resize(concepts.size());
    for (std::size_t c = 0; c < concepts.size(); ++c) {
        const auto& parent = concepts[c].parent;
        if (!parent) {
            roots_.push_back(ConceptId{static_cast<std::uint32_t>(c)});
            continue;
        }
        auto p = find_concept(*parent);
        if (!p) throw TaxonomyError("concept " + concepts[c].name + " has undeclared parent " + *parent);
        parent_[c] = p->value;
        children_[p->value].push_back(ConceptId{static_cast<std::uint32_t>(c)});
    }
    for (const auto& decl : instances) {
        auto c = find_concept(decl.concept_name);
        if (!c) throw TaxonomyError("instance " + decl.name + " has undeclared concept " + decl.concept_name);
        InstanceId id{static_cast<std::uint32_t>(instance_names_.size())};
        if (!instance_by_name_.emplace(decl.name, id).second)
            throw TaxonomyError("duplicate instance: " + decl.name);
        instance_names_.push_back(decl.name);
        instance_concept_.push_back(*c);
    }
}

std::optional<ConceptId> Taxonomy::parent(ConceptId c) const {
    auto p = parent_.at(c.value);
    if (p < 0) return std::nullopt;
    return ConceptId{static_cast<std::uint32_t>(p)};
}

std::optional<ConceptId> Taxonomy::find_concept(std::string_view name) const {
    auto it = concept_by_name_.find(std::string(name));
    if (it == concept_by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<InstanceId> Taxonomy::find_instance(std::string_view name) const {
    auto it = instance_by_name_.find(std::string(name));
    if (it == instance_by_name_.end()) return std::nullopt;
    return it->second;
}

ConceptId Taxonomy::concept_at(std::string_view name) const {
    if (auto c = find_concept(name)) return *c;
    throw TaxonomyError("undeclared concept: " + std::string(name));
}

InstanceId Taxonomy::instance_at(std::string_view name) const {
    if (auto i = find_instance(name)) return *i;
    throw TaxonomyError("undeclared instance: " + std::string(name));
}

std::span<const ConceptId> EulerIndex::subtree(ConceptId c) const {
    return std::span<const ConceptId>(preorder_).subspan(preorder_pos_.at(c.value), subtree_size_[c.value]);
}

EulerIndex build_euler_index(const Taxonomy& tax) {
    std::size_t n = tax.concept_count();
    EulerIndex index;
    index.entry_.assign(n, 0);
    index.exit_.assign(n, 0);
    index.preorder_pos_.assign(n, 0);
    index.subtree_size_.assign(n, 0);
    index.preorder_.reserve(n);

    std::uint32_t time = 0;
    struct Frame {
        ConceptId concept_id;
        std::size_t next_child;
    };
    std::vector<Frame> stack;
    for (ConceptId root : tax.roots()) {
        stack.push_back({root, 0});
        index.entry_[root.value] = ++time;
        index.preorder_pos_[root.value] = static_cast<std::uint32_t>(index.preorder_.size());
        index.preorder_.push_back(root);
        while (!stack.empty()) {
            Frame& top = stack.back();
            auto kids = tax.children(top.concept_id);
            if (top.next_child < kids.size()) {
                ConceptId child = kids[top.next_child++];
                index.entry_[child.value] = ++time;
                index.preorder_pos_[child.value] = static_cast<std::uint32_t>(index.preorder_.size());
                index.preorder_.push_back(child);
                stack.push_back({child, 0});
            } else {
                ConceptId done = top.concept_id;
                index.exit_[done.value] = ++time;
                index.subtree_size_[done.value] =
                    static_cast<std::uint32_t>(index.preorder_.size()) - index.preorder_pos_[done.value];
                stack.pop_back();
            }
        }
    }
    // Concepts on a parent cycle are unreachable from any root.
    if (index.preorder_.size() != n) throw TaxonomyError("taxonomy parent links contain a cycle");
    return index;
}

bool subsumes(const Taxonomy& tax, const EulerIndex& index, InstanceId specific, InstanceId general) {
    if (specific.value >= tax.instance_count() || general.value >= tax.instance_count())
        throw TaxonomyError("undeclared instance");
    if (specific == general) return true;
    return index.is_subtype(tax.concept_of(specific), tax.concept_of(general));
}

bool subsumes_set(const Taxonomy& tax, const EulerIndex& index, std::span<const InstanceId> known,
                  std::span<const InstanceId> required) {
    return std::all_of(required.begin(), required.end(), [&](InstanceId r) {
        return std::any_of(known.begin(), known.end(), [&](InstanceId k) { return subsumes(tax, index, k, r); });
    });
}

HierRepository::HierRepository(std::vector<HierService> services) {
    for (auto& s : services) add(std::move(s));
}

void HierRepository::add(HierService service) {
    if (service.name.empty()) throw std::invalid_argument("service name must be nonempty");
    if (by_name_.contains(service.name)) throw DuplicateServiceError("duplicate service name: " + service.name);
    by_name_.emplace(service.name, services_.size());
    services_.push_back(std::move(service));
}

const HierService* HierRepository::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &services_[it->second];
}

const HierService& HierRepository::at(std::string_view name) const {
    if (const auto* s = find(name)) return *s;
    throw UnknownServiceError("unknown service: " + std::string(name));
}

HierValidationReport validate_hierarchical(const HierInstance& inst, const Composition& comp) {
    const auto& tax = inst.taxonomy;
    const auto& index = inst.index;
    std::vector<const HierService*> calls;
    for (const auto& name : comp.calls) calls.push_back(&inst.repo.at(name));

    std::vector<std::size_t> sizes;
    if (comp.layers) {
        std::vector<std::string> flat;
        for (const auto& layer : *comp.layers) {
            sizes.push_back(layer.size());
            flat.insert(flat.end(), layer.begin(), layer.end());
        }
        if (flat != comp.calls) throw std::invalid_argument("composition layers do not concatenate to calls");
    } else {
        sizes.assign(calls.size(), 1);
    }

    // Entry stamps of the concepts of every known instance. An instance is
    // matched iff some stamp falls inside its concept's interval.
    std::multiset<std::uint32_t> stamps;
    auto learn = [&](InstanceId i) { stamps.insert(index.entry(tax.concept_of(i))); };
    auto matched = [&](InstanceId i) {
        ConceptId c = tax.concept_of(i);
        auto it = stamps.lower_bound(index.entry(c));
        return it != stamps.end() && *it < index.exit(c);
    };
    for (auto i : inst.request.init) learn(i);

    HierValidationReport report;
    std::size_t pos = 0;
    for (std::size_t size : sizes) {
        for (std::size_t k = pos; k < pos + size && !report.violation_position; ++k) {
            for (auto i : calls[k]->inputs)
                if (!matched(i)) report.missing.push_back(i);
            if (!report.missing.empty()) report.violation_position = k + 1;
        }
        for (std::size_t k = pos; k < pos + size; ++k)
            for (auto o : calls[k]->outputs) learn(o);
        pos += size;
    }
    report.goal_covered = std::all_of(inst.request.goal.begin(), inst.request.goal.end(), matched);
    report.valid = report.goal_covered && !report.violation_position;
    return report;
}

std::size_t execution_path(const Composition& comp) {
    if (!comp.layers) {
        if (comp.calls.empty()) return 0;
        throw std::invalid_argument("execution path needs a layered composition");
    }
    return comp.layers->size();
}

namespace {

// Upward-closed set of concepts whose instances are all known.
class Coverage {
public:
    Coverage(const Taxonomy& tax) : tax_(tax), covered_(tax.concept_count(), 0) {}

    bool covered(ConceptId c) const { return covered_[c.value]; }

    // Marks c and its ancestors; returns newly covered concepts.
    template <typename OnNew>
    void cover(ConceptId c, OnNew&& on_new) {
        std::optional<ConceptId> cur = c;
        while (cur && !covered_[cur->value]) {
            covered_[cur->value] = 1;
            on_new(*cur);
            cur = tax_.parent(*cur);
        }
    }

    // True if covering c would add some concept not yet covered for which pred holds.
    template <typename Pred>
    bool would_add(ConceptId c, Pred&& pred) const {
        std::optional<ConceptId> cur = c;
        while (cur && !covered_[cur->value]) {
            if (pred(*cur)) return true;
            cur = tax_.parent(*cur);
        }
        return false;
    }

private:
    const Taxonomy& tax_;
    std::vector<char> covered_;
};

std::vector<ConceptId> distinct_concepts(const Taxonomy& tax, const std::vector<InstanceId>& instances) {
    std::vector<ConceptId> out;
    for (auto i : instances) out.push_back(tax.concept_of(i));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Concept-level projection used for scoring: inputs are required concepts,
// outputs are every concept an output covers.
ScoreTable hierarchical_scores(const HierInstance& inst) {
    const auto& tax = inst.taxonomy;
    std::vector<Service> projected;
    projected.reserve(inst.repo.size());
    for (const auto& s : inst.repo.services()) {
        Service p{s.name, {}, {}};
        for (auto c : distinct_concepts(tax, s.inputs)) p.inputs.push_back(ParameterId{c.value});
        std::vector<ParameterId> outs;
        for (auto o : s.outputs)
            for (std::optional<ConceptId> c = tax.concept_of(o); c; c = tax.parent(*c))
                outs.push_back(ParameterId{c->value});
        p.outputs = make_param_set(std::move(outs));
        projected.push_back(std::move(p));
    }
    ParamSet goal;
    for (auto c : distinct_concepts(tax, inst.request.goal)) goal.push_back(ParameterId{c.value});
    return compute_scores(projected, goal, tax.concept_count());
}

struct LayeredRun {
    std::vector<std::vector<std::size_t>> layers;  // service indices
};

// Layered closure. Within a layer, candidates are taken by rank and skipped
// when they add no coverage beyond the layer's earlier picks.
std::optional<LayeredRun> layered_closure(const HierInstance& inst, const std::vector<std::size_t>& rank) {
    const auto& tax = inst.taxonomy;
    auto services = inst.repo.services();
    std::size_t n = services.size();

    std::vector<std::vector<std::size_t>> consumers(tax.concept_count());
    std::vector<std::size_t> missing(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        auto needed = distinct_concepts(tax, services[s].inputs);
        missing[s] = needed.size();
        for (auto c : needed) consumers[c.value].push_back(s);
    }
    auto goal_concepts = distinct_concepts(tax, inst.request.goal);
    std::vector<char> in_goal(tax.concept_count(), 0);
    for (auto c : goal_concepts) in_goal[c.value] = 1;
    std::size_t goal_missing = goal_concepts.size();

    Coverage coverage(tax);
    std::vector<std::size_t> ready;
    for (std::size_t s = 0; s < n; ++s)
        if (missing[s] == 0) ready.push_back(s);
    auto on_new = [&](ConceptId c) {
        if (in_goal[c.value]) --goal_missing;
        for (std::size_t s : consumers[c.value])
            if (--missing[s] == 0) ready.push_back(s);
    };
    for (auto i : inst.request.init) coverage.cover(tax.concept_of(i), on_new);

    LayeredRun run;
    std::vector<char> layer_mark(tax.concept_count(), 0);
    while (goal_missing > 0) {
        if (ready.empty()) return std::nullopt;
        std::vector<std::size_t> candidates;
        candidates.swap(ready);
        std::sort(candidates.begin(), candidates.end(),
                  [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
        std::vector<std::size_t> chosen;
        std::vector<ConceptId> touched;
        for (std::size_t s : candidates) {
            bool adds = false;
            for (auto o : services[s].outputs) {
                std::optional<ConceptId> cur = tax.concept_of(o);
                while (cur && !coverage.covered(*cur) && !layer_mark[cur->value]) {
                    layer_mark[cur->value] = 1;
                    touched.push_back(*cur);
                    adds = true;
                    cur = tax.parent(*cur);
                }
            }
            if (adds) chosen.push_back(s);
        }
        for (auto c : touched) layer_mark[c.value] = 0;
        for (std::size_t s : chosen)
            for (auto o : services[s].outputs) coverage.cover(tax.concept_of(o), on_new);
        run.layers.push_back(std::move(chosen));
    }
    return run;
}

// One forward usefulness sweep over a flattened sequence of service indices.
std::vector<std::size_t> hierarchical_reduce_pass(const HierInstance& inst, const std::vector<std::size_t>& seq) {
    const auto& tax = inst.taxonomy;
    auto services = inst.repo.services();
    std::vector<std::size_t> future_uses(tax.concept_count(), 0);
    for (std::size_t s : seq)
        for (auto c : distinct_concepts(tax, services[s].inputs)) ++future_uses[c.value];
    for (auto c : distinct_concepts(tax, inst.request.goal)) ++future_uses[c.value];

    Coverage provided(tax);
    for (auto i : inst.request.init) provided.cover(tax.concept_of(i), [](ConceptId) {});

    std::vector<std::size_t> kept;
    for (std::size_t s : seq) {
        for (auto c : distinct_concepts(tax, services[s].inputs)) --future_uses[c.value];
        bool useful = std::any_of(services[s].outputs.begin(), services[s].outputs.end(), [&](InstanceId o) {
            return provided.would_add(tax.concept_of(o), [&](ConceptId c) { return future_uses[c.value] > 0; });
        });
        if (!useful) continue;
        kept.push_back(s);
        for (auto o : services[s].outputs) provided.cover(tax.concept_of(o), [](ConceptId) {});
    }
    return kept;
}

// Earliest-layer placement of a fixed set of services.
std::vector<std::vector<std::size_t>> earliest_layers(const HierInstance& inst, const std::vector<std::size_t>& seq) {
    const auto& tax = inst.taxonomy;
    auto services = inst.repo.services();
    std::vector<std::vector<std::size_t>> consumers(tax.concept_count());
    std::vector<std::size_t> missing(seq.size(), 0);
    for (std::size_t k = 0; k < seq.size(); ++k) {
        auto needed = distinct_concepts(tax, services[seq[k]].inputs);
        missing[k] = needed.size();
        for (auto c : needed) consumers[c.value].push_back(k);
    }
    Coverage coverage(tax);
    std::vector<std::size_t> ready;
    auto on_new = [&](ConceptId c) {
        for (std::size_t k : consumers[c.value])
            if (--missing[k] == 0) ready.push_back(k);
    };
    for (std::size_t k = 0; k < seq.size(); ++k)
        if (missing[k] == 0) ready.push_back(k);
    for (auto i : inst.request.init) coverage.cover(tax.concept_of(i), on_new);

    std::vector<std::vector<std::size_t>> layers;
    std::size_t placed = 0;
    while (!ready.empty()) {
        std::vector<std::size_t> layer;
        layer.swap(ready);
        std::sort(layer.begin(), layer.end());
        for (std::size_t k : layer)
            for (auto o : services[seq[k]].outputs) coverage.cover(tax.concept_of(o), on_new);
        placed += layer.size();
        std::vector<std::size_t> ids;
        for (std::size_t k : layer) ids.push_back(seq[k]);
        layers.push_back(std::move(ids));
    }
    if (placed != seq.size()) throw std::invalid_argument("calls do not form a valid sequence");
    return layers;
}

Composition to_composition(const HierInstance& inst, const std::vector<std::vector<std::size_t>>& layers) {
    auto services = inst.repo.services();
    Composition comp;
    comp.layers.emplace();
    for (const auto& layer : layers) {
        std::vector<std::string> names;
        for (std::size_t s : layer) {
            names.push_back(services[s].name);
            comp.calls.push_back(services[s].name);
        }
        comp.layers->push_back(std::move(names));
    }
    return comp;
}

std::vector<std::size_t> flatten(const std::vector<std::vector<std::size_t>>& layers) {
    std::vector<std::size_t> seq;
    for (const auto& layer : layers) seq.insert(seq.end(), layer.begin(), layer.end());
    return seq;
}

}  // namespace

Composition relayer(const HierInstance& inst, const std::vector<std::string>& calls) {
    std::vector<std::size_t> seq;
    auto services = inst.repo.services();
    for (const auto& name : calls) {
        const HierService& s = inst.repo.at(name);
        seq.push_back(static_cast<std::size_t>(&s - services.data()));
    }
    return to_composition(inst, earliest_layers(inst, seq));
}

std::optional<Composition> find_composition_hierarchical(const HierInstance& inst, HierSearchOptions options) {
    auto services = inst.repo.services();
    std::vector<std::size_t> order(services.size());
    std::iota(order.begin(), order.end(), 0);
    if (options.use_scores) {
        ScoreTable scores = hierarchical_scores(inst);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores.service_score[a] != scores.service_score[b])
                return scores.service_score[a] > scores.service_score[b];
            return services[a].name < services[b].name;
        });
    } else {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return services[a].name < services[b].name; });
    }
    std::vector<std::size_t> rank(services.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    auto run = layered_closure(inst, rank);
    if (!run) return std::nullopt;
    auto layers = std::move(run->layers);
    if (options.reduce) {
        for (std::size_t pass = 0; pass < std::max<std::size_t>(services.size(), 1); ++pass) {
            auto seq = flatten(layers);
            auto kept = hierarchical_reduce_pass(inst, seq);
            auto next = earliest_layers(inst, kept);
            bool unchanged = kept.size() == seq.size() && next.size() == layers.size();
            layers = std::move(next);
            if (unchanged) break;
        }
    }
    return to_composition(inst, layers);
}

}  // namespace wsc

#include "wsc/oo.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

namespace wsc {

namespace {

std::vector<ConceptDecl> plain_decls(const std::vector<OOConceptDecl>& concepts) {
    std::vector<ConceptDecl> out;
    for (const auto& c : concepts) out.push_back({c.name, c.parent});
    return out;
}

}  // namespace

ConceptTree::ConceptTree(const std::vector<OOConceptDecl>& concepts)
    : tax_(plain_decls(concepts)), index_(build_euler_index(tax_)) {
    for (const auto& decl : concepts) {
        ConceptId c = tax_.concept_at(decl.name);
        for (const auto& prop : decl.props) {
            if (prop.name.empty()) throw TaxonomyError("property name must be nonempty");
            auto it = prop_by_name_.find(prop.name);
            if (it == prop_by_name_.end()) {
                PropertyId id{static_cast<std::uint32_t>(prop_names_.size())};
                prop_by_name_.emplace(prop.name, id);
                prop_names_.push_back(prop.name);
                prop_types_.push_back(prop.type);
                definer_.push_back(c);
                continue;
            }
            ConceptId& definer = definer_[it->second.value];
            if (is_a(definer, c)) {
                definer = c;
            } else if (!is_a(c, definer)) {
                throw TaxonomyError("property " + prop.name + " declared on unrelated concepts " +
                                    tax_.concept_name(definer) + " and " + decl.name);
            }
        }
    }
}

std::optional<PropertyId> ConceptTree::find_property(std::string_view name) const {
    auto it = prop_by_name_.find(std::string(name));
    if (it == prop_by_name_.end()) return std::nullopt;
    return it->second;
}

PropertyId ConceptTree::property_at(std::string_view name) const {
    if (auto p = find_property(name)) return *p;
    throw TaxonomyError("undeclared property: " + std::string(name));
}

std::vector<PropertyId> ConceptTree::properties(ConceptId c) const {
    std::vector<PropertyId> out;
    for (std::uint32_t p = 0; p < prop_names_.size(); ++p)
        if (has(c, PropertyId{p})) out.push_back(PropertyId{p});
    return out;
}

const OOService* OOInstance::find_service(std::string_view name) const {
    auto it = service_index.find(std::string(name));
    return it == service_index.end() ? nullptr : &services[it->second];
}

OOInstance make_oo_instance(ConceptTree tree, std::vector<OOService> services, OOQuery query) {
    OOInstance inst{std::move(tree), std::move(services), {}, std::move(query)};
    auto check = [&](std::vector<PartialConcept>& params, const std::string& owner) {
        for (auto& pc : params) {
            std::sort(pc.props.begin(), pc.props.end());
            pc.props.erase(std::unique(pc.props.begin(), pc.props.end()), pc.props.end());
            for (auto p : pc.props)
                if (!inst.tree.has(pc.concept_id, p))
                    throw TaxonomyError(owner + ": concept " + inst.tree.taxonomy().concept_name(pc.concept_id) +
                                        " has no property " + inst.tree.property_name(p));
        }
    };
    for (std::size_t s = 0; s < inst.services.size(); ++s) {
        auto& svc = inst.services[s];
        if (svc.name.empty()) throw std::invalid_argument("service name must be nonempty");
        if (!inst.service_index.emplace(svc.name, s).second)
            throw DuplicateServiceError("duplicate service name: " + svc.name);
        check(svc.inputs, svc.name);
        check(svc.outputs, svc.name);
    }
    check(inst.query.known, "query");
    check(inst.query.required, "query");
    return inst;
}

OOEngine::OOEngine(const OOInstance& inst)
    : inst_(inst),
      concept_known_(inst.tree.taxonomy().concept_count(), 0),
      presence_required_(inst.tree.taxonomy().concept_count()),
      remaining_props_(inst.services.size() + 1),
      remaining_presence_(inst.services.size() + 1),
      remaining_count_(inst.services.size() + 1, 0) {
    for (std::size_t s = 0; s <= inst.services.size(); ++s) {
        const auto& inputs = s < inst.services.size() ? inst.services[s].inputs : inst.query.required;
        for (const auto& pc : inputs) {
            if (pc.props.empty()) {
                if (remaining_presence_[s].insert(pc.concept_id).second) {
                    presence_required_[pc.concept_id.value].push_back(s);
                    ++remaining_count_[s];
                }
                continue;
            }
            for (auto p : pc.props) {
                if (remaining_props_[s][pc.concept_id].insert(p).second) {
                    required_[key(pc.concept_id, p)].push_back(s);
                    ++remaining_count_[s];
                }
            }
        }
        if (remaining_count_[s] == 0) newly_callable_.push_back(s);
    }
}

bool OOEngine::known(ConceptId c, PropertyId p) const { return known_.contains(key(c, p)); }

std::map<ConceptId, std::set<PropertyId>> OOEngine::remaining(std::size_t service) const {
    auto out = remaining_props_.at(service);
    for (auto it = out.begin(); it != out.end();) it = it->second.empty() ? out.erase(it) : std::next(it);
    for (auto c : remaining_presence_.at(service)) out[c];
    return out;
}

bool OOEngine::presence_pending(std::size_t service, ConceptId c) const {
    return remaining_presence_.at(service).contains(c);
}

std::vector<std::size_t> OOEngine::take_newly_callable() {
    std::vector<std::size_t> out;
    out.swap(newly_callable_);
    return out;
}

void OOEngine::satisfy(std::size_t service) {
    ++index_updates_;
    if (--remaining_count_[service] == 0) newly_callable_.push_back(service);
}

void OOEngine::learn(const std::vector<PartialConcept>& outputs) {
    const auto& tax = inst_.tree.taxonomy();
    for (const auto& pc : outputs) {
        for (std::optional<ConceptId> cur = pc.concept_id; cur && !concept_known_[cur->value]; cur = tax.parent(*cur)) {
            concept_known_[cur->value] = 1;
            for (std::size_t s : presence_required_[cur->value]) {
                remaining_presence_[s].erase(*cur);
                satisfy(s);
            }
        }
        for (auto p : pc.props) {
            for (std::optional<ConceptId> cur = pc.concept_id; cur && inst_.tree.has(*cur, p); cur = tax.parent(*cur)) {
                if (!known_.emplace(key(*cur, p), 1).second) break;
                auto it = required_.find(key(*cur, p));
                if (it == required_.end()) continue;
                for (std::size_t s : it->second) {
                    remaining_props_[s][*cur].erase(p);
                    satisfy(s);
                }
            }
        }
    }
}

void OOEngine::call_init() { learn(inst_.query.known); }

void OOEngine::call_web_service(std::size_t service) { learn(inst_.services.at(service).outputs); }

std::optional<Composition> find_comp(const OOInstance& inst, OOSearchOptions options) {
    OOEngine engine(inst);
    std::priority_queue<std::pair<std::string_view, std::size_t>, std::vector<std::pair<std::string_view, std::size_t>>,
                        std::greater<>>
        callable;
    auto collect = [&] {
        for (std::size_t s : engine.take_newly_callable())
            if (s != engine.goal_index()) callable.emplace(inst.services[s].name, s);
    };
    collect();
    engine.call_init();
    collect();

    Composition comp;
    while (!engine.goal_callable()) {
        if (callable.empty()) return std::nullopt;
        std::size_t s = callable.top().second;
        callable.pop();
        comp.calls.push_back(inst.services[s].name);
        engine.call_web_service(s);
        collect();
    }
    if (options.reduce) comp = reduce_oo(inst, comp);
    return comp;
}

namespace {

constexpr std::uint32_t kPresence = 0xFFFFFFFFU;

std::uint64_t item(ConceptId c, std::uint32_t p) { return (std::uint64_t{c.value} << 32) | p; }

std::vector<std::uint64_t> required_items(const std::vector<PartialConcept>& inputs) {
    std::vector<std::uint64_t> out;
    for (const auto& pc : inputs) {
        if (pc.props.empty()) out.push_back(item(pc.concept_id, kPresence));
        for (auto p : pc.props) out.push_back(item(pc.concept_id, p.value));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::uint64_t> provided_items(const ConceptTree& tree, const std::vector<PartialConcept>& outputs) {
    const auto& tax = tree.taxonomy();
    std::vector<std::uint64_t> out;
    for (const auto& pc : outputs) {
        for (std::optional<ConceptId> c = pc.concept_id; c; c = tax.parent(*c)) {
            out.push_back(item(*c, kPresence));
            for (auto p : pc.props)
                if (tree.has(*c, p)) out.push_back(item(*c, p.value));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> oo_reduce_pass(const OOInstance& inst, const std::vector<const OOService*>& calls) {
    std::unordered_map<std::uint64_t, std::size_t> future_uses;
    for (const auto* s : calls)
        for (auto i : required_items(s->inputs)) ++future_uses[i];
    for (auto i : required_items(inst.query.required)) ++future_uses[i];

    std::unordered_set<std::uint64_t> provided;
    for (auto i : provided_items(inst.tree, inst.query.known)) provided.insert(i);

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < calls.size(); ++k) {
        for (auto i : required_items(calls[k]->inputs)) --future_uses[i];
        auto items = provided_items(inst.tree, calls[k]->outputs);
        bool useful = std::any_of(items.begin(), items.end(), [&](std::uint64_t i) {
            if (provided.contains(i)) return false;
            auto it = future_uses.find(i);
            return it != future_uses.end() && it->second > 0;
        });
        if (!useful) continue;
        kept.push_back(k);
        provided.insert(items.begin(), items.end());
    }
    return kept;
}

}  // namespace

Composition reduce_oo(const OOInstance& inst, const Composition& comp) {
    if (!validate_oo(inst, comp).valid) throw std::invalid_argument("reduce_oo requires a valid composition");
    Composition cur = comp;
    cur.layers.reset();
    for (std::size_t pass = 0; pass < std::max<std::size_t>(inst.services.size(), 1); ++pass) {
        std::vector<const OOService*> calls;
        for (const auto& name : cur.calls) calls.push_back(inst.find_service(name));
        Composition next;
        for (std::size_t k : oo_reduce_pass(inst, calls)) next.calls.push_back(cur.calls[k]);
        bool unchanged = next.calls.size() == cur.calls.size();
        cur = std::move(next);
        if (unchanged) break;
    }
    return cur;
}

OOValidationReport validate_oo(const OOInstance& inst, const Composition& comp) {
    const auto& tree = inst.tree;
    const auto& tax = tree.taxonomy();
    // P: partially defined concepts known so far.
    std::map<ConceptId, std::set<PropertyId>> known;

    auto isa = [&](ConceptId sub, ConceptId general) {
        for (std::optional<ConceptId> c = sub; c; c = tax.parent(*c))
            if (*c == general) return true;
        return false;
    };
    auto add = [&](const std::vector<PartialConcept>& outputs) {
        for (const auto& out : outputs) {
            for (std::optional<ConceptId> c = out.concept_id; c; c = tax.parent(*c)) {
                auto& props = known[*c];
                for (auto p : out.props)
                    if (tree.has(*c, p)) props.insert(p);
            }
        }
    };
    auto matches = [&](const std::vector<PartialConcept>& inputs) {
        return std::all_of(inputs.begin(), inputs.end(), [&](const PartialConcept& in) {
            return std::any_of(known.begin(), known.end(), [&](const auto& entry) {
                return isa(entry.first, in.concept_id) &&
                       std::includes(entry.second.begin(), entry.second.end(), in.props.begin(), in.props.end());
            });
        });
    };

    add(inst.query.known);
    OOValidationReport report;
    for (std::size_t pos = 0; pos < comp.calls.size(); ++pos) {
        const OOService* svc = inst.find_service(comp.calls[pos]);
        if (!svc) throw UnknownServiceError("unknown service: " + comp.calls[pos]);
        if (!report.violation_position && !matches(svc->inputs)) report.violation_position = pos + 1;
        add(svc->outputs);
    }
    report.goal_covered = matches(inst.query.required);
    report.valid = report.goal_covered && !report.violation_position;
    return report;
}

}  // namespace wsc

#include "wsc/relational.hpp"

#include <algorithm>
#include <functional>

namespace wsc {

RelOntology::RelOntology(Taxonomy tax, std::vector<RelationDecl> relations)
    : tax_(std::move(tax)), index_(build_euler_index(tax_)), relations_(std::move(relations)) {
    for (std::uint32_t r = 0; r < relations_.size(); ++r) {
        if (relations_[r].name.empty()) throw std::invalid_argument("relation name must be nonempty");
        if (!by_name_.emplace(relations_[r].name, r).second)
            throw std::invalid_argument("duplicate relation: " + relations_[r].name);
    }
}

std::optional<std::uint32_t> RelOntology::find_relation(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t RelOntology::relation_at(std::string_view name) const {
    if (auto r = find_relation(name)) return *r;
    throw std::invalid_argument("undeclared relation: " + std::string(name));
}

std::size_t RelInstance::user_rule_count() const {
    return static_cast<std::size_t>(std::count_if(rules.begin(), rules.end(), [](const Rule& r) { return !r.internal; }));
}

const RelService* RelInstance::find_service(std::string_view name) const {
    auto it = service_index.find(std::string(name));
    return it == service_index.end() ? nullptr : &services[it->second];
}

const Rule* RelInstance::find_rule(std::string_view name) const {
    for (const auto& r : rules)
        if (r.name == name) return &r;
    return nullptr;
}

namespace {

std::uint32_t slot_of(const std::vector<std::string>& names, const std::string& name, const std::string& owner) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument(owner + " references undeclared parameter " + name);
    return static_cast<std::uint32_t>(it - names.begin());
}

RelService compile_service(const RelOntology& ont, const std::string& name, const std::vector<RelParamDecl>& inputs,
                           const std::vector<RelParamDecl>& outputs, const std::vector<RelAtomDecl>& relations) {
    RelService svc;
    svc.name = name;
    svc.input_count = inputs.size();
    for (const auto* list : {&inputs, &outputs}) {
        for (const auto& p : *list) {
            if (std::find(svc.slot_names.begin(), svc.slot_names.end(), p.name) != svc.slot_names.end())
                throw std::invalid_argument(name + " declares parameter " + p.name + " twice");
            svc.slot_names.push_back(p.name);
            svc.slot_types.push_back(ont.taxonomy().concept_at(p.type));
        }
    }
    for (const auto& atom : relations) {
        SlotAtom a{ont.relation_at(atom.relation), slot_of(svc.slot_names, atom.first, name),
                   slot_of(svc.slot_names, atom.second, name)};
        if (a.first < svc.input_count && a.second < svc.input_count)
            svc.preconditions.push_back(a);
        else
            svc.effects.push_back(a);
    }
    return svc;
}

}  // namespace

RelInstance compile_relational(const RelInstanceDecl& decl) {
    RelInstance inst;
    inst.ontology = RelOntology(Taxonomy(decl.concepts), decl.relations);
    const auto& ont = inst.ontology;

    for (const auto& rd : decl.rules) {
        Rule rule;
        rule.name = rd.name;
        rule.vars = rd.params;
        for (const auto* list : {&rd.pre, &rd.eff}) {
            for (const auto& atom : *list) {
                SlotAtom a{ont.relation_at(atom.relation), slot_of(rule.vars, atom.first, rd.name),
                           slot_of(rule.vars, atom.second, rd.name)};
                (list == &rd.pre ? rule.pre : rule.eff).push_back(a);
            }
        }
        if (rule.eff.empty()) throw std::invalid_argument("rule " + rd.name + " has no effects");
        inst.rules.push_back(std::move(rule));
    }
    for (std::uint32_t r = 0; r < ont.relations().size(); ++r) {
        const auto& rel = ont.relations()[r];
        if (rel.symmetric)
            inst.rules.push_back(Rule{rel.name + "#symmetric", {"X", "Y"}, {{r, 0, 1}}, {{r, 1, 0}}, true});
        if (rel.transitive)
            inst.rules.push_back(
                Rule{rel.name + "#transitive", {"X", "Y", "Z"}, {{r, 0, 1}, {r, 1, 2}}, {{r, 0, 2}}, true});
    }

    for (const auto& sd : decl.services) {
        if (sd.name.empty()) throw std::invalid_argument("service name must be nonempty");
        if (inst.service_index.contains(sd.name)) throw DuplicateServiceError("duplicate service name: " + sd.name);
        inst.service_index.emplace(sd.name, inst.services.size());
        inst.services.push_back(compile_service(ont, sd.name, sd.inputs, sd.outputs, sd.relations));
    }

    std::vector<RelAtomDecl> known_rel;
    std::vector<std::string> known_names;
    for (const auto& p : decl.query.known) known_names.push_back(p.name);
    for (const auto& atom : decl.query.relations) {
        bool first_known = std::find(known_names.begin(), known_names.end(), atom.first) != known_names.end();
        bool second_known = std::find(known_names.begin(), known_names.end(), atom.second) != known_names.end();
        if (first_known && second_known) known_rel.push_back(atom);
    }
    inst.seed = compile_service(ont, "#query-in", {}, decl.query.known, known_rel);
    std::vector<RelParamDecl> goal_inputs = decl.query.known;
    goal_inputs.insert(goal_inputs.end(), decl.query.required.begin(), decl.query.required.end());
    inst.goal = compile_service(ont, "#query-out", goal_inputs, {}, decl.query.relations);
    return inst;
}

// ---- knowledge ----

KnowledgeState::KnowledgeState(const RelOntology& ontology)
    : by_type_(ontology.taxonomy().concept_count()),
      triple_ids_(ontology.relations().size()),
      out_(ontology.relations().size()),
      in_(ontology.relations().size()) {}

std::uint64_t KnowledgeState::key(Triple t) { return (std::uint64_t{t.first} << 32) | t.second; }

std::uint32_t KnowledgeState::add_object(std::string id, ConceptId type) {
    if (by_id_.contains(id)) throw std::invalid_argument("duplicate object id: " + id);
    auto index = static_cast<std::uint32_t>(objects_.size());
    by_id_.emplace(id, index);
    objects_.push_back(ObjectRef{std::move(id), type});
    by_type_.at(type.value).push_back(index);
    return index;
}

bool KnowledgeState::add_triple(Triple t) {
    if (t.first >= objects_.size() || t.second >= objects_.size())
        throw std::invalid_argument("triple references an unknown object");
    auto& ids = triple_ids_.at(t.relation);
    if (!ids.emplace(key(t), static_cast<std::uint32_t>(triples_.size())).second) return false;
    triples_.push_back(t);
    auto& out = out_[t.relation];
    auto& in = in_[t.relation];
    std::size_t need = std::max(t.first, t.second) + 1;
    if (out.size() < need) out.resize(need);
    if (in.size() < need) in.resize(need);
    out[t.first].push_back(t.second);
    in[t.second].push_back(t.first);
    return true;
}

bool KnowledgeState::holds(Triple t) const { return triple_ids_[t.relation].contains(key(t)); }

std::optional<std::uint32_t> KnowledgeState::triple_index(Triple t) const {
    const auto& ids = triple_ids_[t.relation];
    auto it = ids.find(key(t));
    if (it == ids.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> KnowledgeState::find_object(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::span<const std::uint32_t> KnowledgeState::sources(std::uint32_t relation, std::uint32_t o) const {
    const auto& in = in_[relation];
    if (o >= in.size()) return {};
    return in[o];
}

std::span<const std::uint32_t> KnowledgeState::targets(std::uint32_t relation, std::uint32_t o) const {
    const auto& out = out_[relation];
    if (o >= out.size()) return {};
    return out[o];
}

std::span<const std::uint32_t> KnowledgeState::objects_of(ConceptId c) const { return by_type_.at(c.value); }

std::uint64_t digest_hash(const MatchAssignment& m) {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto o : m.objects) {
        for (int byte = 0; byte < 4; ++byte) {
            h ^= (o >> (8 * byte)) & 0xFFU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::size_t RelComposition::service_calls() const {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const RelStep& s) { return std::holds_alternative<RelCallStep>(s); }));
}

std::size_t RelComposition::rule_applications() const { return steps.size() - service_calls(); }

void close_properties(KnowledgeState& k, const RelOntology& ontology) {
    for (std::size_t i = 0; i < k.triples().size(); ++i) {
        Triple t = k.triples()[i];
        const auto& rel = ontology.relations()[t.relation];
        if (rel.symmetric) k.add_triple({t.relation, t.second, t.first});
        if (rel.transitive) {
            std::vector<std::uint32_t> after(k.targets(t.relation, t.second).begin(),
                                             k.targets(t.relation, t.second).end());
            for (auto c : after) k.add_triple({t.relation, t.first, c});
            std::vector<std::uint32_t> before(k.sources(t.relation, t.first).begin(),
                                              k.sources(t.relation, t.first).end());
            for (auto a : before) k.add_triple({t.relation, a, t.second});
        }
    }
}

// ---- engine ----

RelationalEngine::RelationalEngine(const RelInstance& inst, RelSearchOptions options)
    : inst_(inst),
      options_(options),
      knowledge_(inst.ontology),
      service_history_(inst.services.size()),
      rule_history_(inst.rules.size()),
      call_ordinal_(inst.services.size(), 0) {}

template <typename Visit>
void RelationalEngine::enumerate(const std::vector<std::optional<ConceptId>>& types,
                                 const std::vector<SlotAtom>& atoms,
                                 const std::vector<std::optional<std::uint32_t>>& pinned, Visit&& visit) const {
    const std::size_t n = types.size();
    std::vector<std::vector<const SlotAtom*>> checks(n);
    std::vector<const SlotAtom*> anchor(n, nullptr);
    for (const auto& atom : atoms) {
        std::size_t level = std::max(atom.first, atom.second);
        checks[level].push_back(&atom);
        if (atom.first != atom.second && !options_.both_orientations && !anchor[level]) anchor[level] = &atom;
    }

    MatchAssignment cur;
    cur.objects.assign(n, 0);
    bool stop = false;
    const auto& ont = inst_.ontology;

    auto holds = [&](const SlotAtom& a) {
        Triple t{a.relation, cur.objects[a.first], cur.objects[a.second]};
        if (knowledge_.holds(t)) return true;
        return options_.both_orientations && knowledge_.holds({a.relation, t.second, t.first});
    };

    std::function<void(std::size_t)> descend = [&](std::size_t level) {
        if (level == n) {
            if (!visit(cur)) stop = true;
            return;
        }
        auto try_candidate = [&](std::uint32_t cand) {
            if (types[level] && !ont.is_subtype(knowledge_.object(cand).type, *types[level])) return;
            cur.objects[level] = cand;
            for (const SlotAtom* a : checks[level])
                if (!holds(*a)) return;
            descend(level + 1);
        };
        if (pinned[level]) {
            try_candidate(*pinned[level]);
        } else if (const SlotAtom* a = anchor[level]) {
            auto span = a->first == level ? knowledge_.sources(a->relation, cur.objects[a->second])
                                           : knowledge_.targets(a->relation, cur.objects[a->first]);
            for (auto cand : span) {
                try_candidate(cand);
                if (stop) return;
            }
        } else if (types[level]) {
            for (ConceptId c : ont.index().subtree(*types[level])) {
                for (auto cand : knowledge_.objects_of(c)) {
                    try_candidate(cand);
                    if (stop) return;
                }
            }
        } else {
            for (std::uint32_t cand = 0; cand < knowledge_.object_count(); ++cand) {
                try_candidate(cand);
                if (stop) return;
            }
        }
    };
    descend(0);
}

std::vector<std::uint32_t> RelationalEngine::cap_key(std::size_t, const MatchAssignment& m) const {
    std::vector<std::uint32_t> types;
    for (auto o : m.objects) types.push_back(knowledge_.object(o).type.value);
    std::sort(types.begin(), types.end());
    return types;
}

std::optional<MatchAssignment> RelationalEngine::find_match(std::size_t service) const {
    const RelService& svc = inst_.services.at(service);
    std::vector<std::optional<ConceptId>> types(svc.slot_types.begin(), svc.slot_types.begin() + svc.input_count);
    std::vector<std::optional<std::uint32_t>> pinned(svc.input_count);
    std::optional<MatchAssignment> found;
    enumerate(types, svc.preconditions, pinned, [&](const MatchAssignment& m) {
        if (service_history_[service].contains(m)) return true;
        auto it = rounds_.find({service, cap_key(service, m)});
        if (it != rounds_.end() && it->second >= options_.object_cap) return true;
        found = m;
        return false;
    });
    return found;
}

std::vector<std::uint32_t> RelationalEngine::premise_triples(const std::vector<SlotAtom>& atoms,
                                                             const MatchAssignment& m) const {
    std::vector<std::uint32_t> out;
    for (const auto& a : atoms) {
        Triple t{a.relation, m.objects[a.first], m.objects[a.second]};
        auto idx = knowledge_.triple_index(t);
        if (!idx && options_.both_orientations) idx = knowledge_.triple_index({a.relation, t.second, t.first});
        if (idx) out.push_back(*idx);
    }
    return out;
}

void RelationalEngine::add_effects(const std::vector<SlotAtom>& atoms, const std::vector<std::uint32_t>& slots,
                                   std::int64_t step, const std::vector<std::uint32_t>& premises) {
    for (const auto& a : atoms) {
        if (knowledge_.add_triple({a.relation, slots[a.first], slots[a.second]}))
            origins_.push_back({step, premises});
    }
}

void RelationalEngine::seed() {
    const RelService& s = inst_.seed;
    std::vector<std::uint32_t> slots;
    for (std::size_t i = 0; i < s.slot_names.size(); ++i) {
        auto o = knowledge_.add_object(s.slot_names[i], s.slot_types[i]);
        creator_.push_back(-1);
        slots.push_back(o);
    }
    seed_objects_ = slots;
    add_effects(s.effects, slots, -1, {});
    apply_inference_rules();
}

void RelationalEngine::call_service(std::size_t service, const MatchAssignment& m) {
    const RelService& svc = inst_.services.at(service);
    auto step = static_cast<std::int64_t>(steps_.size());
    std::size_t ordinal = ++call_ordinal_[service];

    Step record;
    record.index = service;
    record.binding = m;
    record.premises = premise_triples(svc.preconditions, m);

    std::vector<std::uint32_t> slots = m.objects;
    for (std::size_t k = svc.input_count; k < svc.slot_names.size(); ++k) {
        std::string id = svc.name + "." + svc.slot_names[k] + "#" + std::to_string(ordinal);
        while (knowledge_.find_object(id)) id += "'";
        auto o = knowledge_.add_object(std::move(id), svc.slot_types[k]);
        creator_.push_back(step);
        record.created.push_back(o);
        slots.push_back(o);
    }
    service_history_[service].insert(m);
    ++rounds_[{service, cap_key(service, m)}];
    steps_.push_back(std::move(record));
    add_effects(svc.effects, slots, step, {});
    apply_rules(false);
}

std::vector<MatchAssignment> RelationalEngine::all_rule_bindings(const Rule& rule) const {
    std::vector<std::optional<ConceptId>> types(rule.vars.size());
    std::vector<std::optional<std::uint32_t>> pinned(rule.vars.size());
    std::vector<MatchAssignment> out;
    enumerate(types, rule.pre, pinned, [&](const MatchAssignment& m) {
        out.push_back(m);
        return true;
    });
    return out;
}

bool RelationalEngine::rule_seen(std::size_t rule, const MatchAssignment& m) const {
    return rule_history_.at(rule).contains(m);
}

std::size_t RelationalEngine::apply_rules(bool include_user) {
    std::size_t applications = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < inst_.rules.size(); ++r) {
            const Rule& rule = inst_.rules[r];
            if (!rule.internal && !include_user) continue;
            for (const auto& m : all_rule_bindings(rule)) {
                if (!rule.internal && !rule_history_[r].insert(m).second) continue;
                bool adds = std::any_of(rule.eff.begin(), rule.eff.end(), [&](const SlotAtom& a) {
                    return !knowledge_.holds({a.relation, m.objects[a.first], m.objects[a.second]});
                });
                if (!adds) continue;
                changed = true;
                auto premises = premise_triples(rule.pre, m);
                if (rule.internal) {
                    add_effects(rule.eff, m.objects, -1, premises);
                } else {
                    auto step = static_cast<std::int64_t>(steps_.size());
                    steps_.push_back(Step{true, r, m, {}, premises});
                    add_effects(rule.eff, m.objects, step, {});
                    ++applications;
                }
            }
        }
    }
    return applications;
}

std::size_t RelationalEngine::apply_inference_rules() { return apply_rules(options_.use_rules); }

std::vector<MatchAssignment> RelationalEngine::goal_matches(std::size_t limit) const {
    const RelService& g = inst_.goal;
    std::vector<std::optional<ConceptId>> types(g.slot_types.begin(), g.slot_types.end());
    std::vector<std::optional<std::uint32_t>> pinned(g.slot_types.size());
    for (std::size_t i = 0; i < seed_objects_.size(); ++i) pinned[i] = seed_objects_[i];
    std::vector<MatchAssignment> out;
    if (limit == 0) return out;
    enumerate(types, g.preconditions, pinned, [&](const MatchAssignment& m) {
        out.push_back(m);
        return out.size() < limit;
    });
    return out;
}

std::size_t RelationalEngine::calls_made() const {
    return static_cast<std::size_t>(std::count_if(steps_.begin(), steps_.end(), [](const Step& s) { return !s.is_rule; }));
}

RelComposition RelationalEngine::extract(const MatchAssignment& goal) const {
    std::vector<char> needed(steps_.size(), 0);
    std::vector<char> object_seen(knowledge_.object_count(), 0);
    std::vector<char> triple_seen(knowledge_.triples().size(), 0);
    std::vector<std::uint32_t> objects(goal.objects.begin(), goal.objects.end());
    std::vector<std::uint32_t> triples = premise_triples(inst_.goal.preconditions, goal);

    auto mark = [&](std::int64_t k) {
        if (needed[k]) return;
        needed[k] = 1;
        const Step& s = steps_[k];
        objects.insert(objects.end(), s.binding.objects.begin(), s.binding.objects.end());
        triples.insert(triples.end(), s.premises.begin(), s.premises.end());
    };
    while (!objects.empty() || !triples.empty()) {
        if (!objects.empty()) {
            auto o = objects.back();
            objects.pop_back();
            if (object_seen[o]) continue;
            object_seen[o] = 1;
            if (creator_[o] >= 0) mark(creator_[o]);
        } else {
            auto t = triples.back();
            triples.pop_back();
            if (triple_seen[t]) continue;
            triple_seen[t] = 1;
            const auto& origin = origins_[t];
            if (origin.step >= 0)
                mark(origin.step);
            else
                triples.insert(triples.end(), origin.premises.begin(), origin.premises.end());
        }
    }

    RelComposition comp;
    for (std::size_t k = 0; k < steps_.size(); ++k) {
        if (!needed[k]) continue;
        const Step& s = steps_[k];
        if (s.is_rule) {
            const Rule& rule = inst_.rules[s.index];
            RelRuleStep step{rule.name, {}};
            for (std::size_t v = 0; v < rule.vars.size(); ++v)
                step.bindings.emplace_back(rule.vars[v], knowledge_.object(s.binding.objects[v]).id);
            comp.steps.emplace_back(std::move(step));
        } else {
            const RelService& svc = inst_.services[s.index];
            RelCallStep step{svc.name, {}, {}};
            for (std::size_t i = 0; i < svc.input_count; ++i)
                step.bindings.emplace_back(svc.slot_names[i], knowledge_.object(s.binding.objects[i]).id);
            for (std::size_t i = 0; i < s.created.size(); ++i)
                step.outputs.emplace_back(svc.slot_names[svc.input_count + i], knowledge_.object(s.created[i]).id);
            comp.steps.emplace_back(std::move(step));
        }
    }
    for (std::size_t i = 0; i < inst_.goal.slot_names.size(); ++i)
        comp.goal_binding.emplace_back(inst_.goal.slot_names[i], knowledge_.object(goal.objects[i]).id);
    return comp;
}

std::optional<RelComposition> search_composition_relational(const RelInstance& inst, RelSearchOptions options) {
    RelationalEngine engine(inst, options);
    engine.seed();
    for (;;) {
        auto goals = engine.goal_matches(options.goal_binding_limit);
        if (!goals.empty()) {
            std::optional<RelComposition> best;
            for (const auto& g : goals) {
                auto comp = engine.extract(g);
                if (!best || std::pair(comp.service_calls(), comp.steps.size()) <
                                 std::pair(best->service_calls(), best->steps.size()))
                    best = std::move(comp);
            }
            return best;
        }
        bool called = false;
        for (std::size_t s = 0; s < inst.services.size(); ++s) {
            if (auto m = engine.find_match(s)) {
                engine.call_service(s, *m);
                called = true;
            }
        }
        if (!called) return std::nullopt;
        engine.apply_inference_rules();
    }
}

// ---- validation ----

namespace {

const std::string* bound_id(const std::vector<std::pair<std::string, std::string>>& bindings, const std::string& name) {
    for (const auto& [param, id] : bindings)
        if (param == name) return &id;
    return nullptr;
}

}  // namespace

RelValidationReport validate_relational(const RelInstance& inst, const RelComposition& comp, bool both_orientations) {
    const auto& ont = inst.ontology;
    KnowledgeState k(ont);
    auto holds = [&](std::uint32_t rel, std::uint32_t a, std::uint32_t b) {
        return k.holds({rel, a, b}) || (both_orientations && k.holds({rel, b, a}));
    };

    std::vector<std::uint32_t> seed;
    for (std::size_t i = 0; i < inst.seed.slot_names.size(); ++i)
        seed.push_back(k.add_object(inst.seed.slot_names[i], inst.seed.slot_types[i]));
    for (const auto& a : inst.seed.effects) k.add_triple({a.relation, seed[a.first], seed[a.second]});
    close_properties(k, ont);

    RelValidationReport report;
    auto fail = [&](std::size_t pos, std::string reason) {
        report.violation_position = pos + 1;
        report.reason = std::move(reason);
        return report;
    };
    std::vector<std::size_t> ordinal(inst.services.size(), 0);

    for (std::size_t pos = 0; pos < comp.steps.size(); ++pos) {
        if (const auto* call = std::get_if<RelCallStep>(&comp.steps[pos])) {
            const RelService* svc = inst.find_service(call->service);
            if (!svc) throw UnknownServiceError("unknown service: " + call->service);
            std::vector<std::uint32_t> slots;
            for (std::size_t i = 0; i < svc->input_count; ++i) {
                const std::string* id = bound_id(call->bindings, svc->slot_names[i]);
                if (!id) return fail(pos, "unbound input " + svc->slot_names[i]);
                auto o = k.find_object(*id);
                if (!o) return fail(pos, "unknown object " + *id);
                if (!ont.is_subtype(k.object(*o).type, svc->slot_types[i]))
                    return fail(pos, "object " + *id + " has the wrong type");
                slots.push_back(*o);
            }
            for (const auto& a : svc->preconditions)
                if (!holds(a.relation, slots[a.first], slots[a.second]))
                    return fail(pos, "precondition " + ont.relations()[a.relation].name + " does not hold");
            std::size_t n = ++ordinal[inst.service_index.at(svc->name)];
            for (std::size_t i = svc->input_count; i < svc->slot_names.size(); ++i) {
                const std::string* declared = bound_id(call->outputs, svc->slot_names[i]);
                std::string id = declared ? *declared : svc->name + "." + svc->slot_names[i] + "#" + std::to_string(n);
                if (k.find_object(id)) return fail(pos, "output object id " + id + " already exists");
                slots.push_back(k.add_object(id, svc->slot_types[i]));
            }
            for (const auto& a : svc->effects) k.add_triple({a.relation, slots[a.first], slots[a.second]});
        } else {
            const auto& step = std::get<RelRuleStep>(comp.steps[pos]);
            const Rule* rule = inst.find_rule(step.rule);
            if (!rule || rule->internal) throw UnknownServiceError("unknown rule: " + step.rule);
            std::vector<std::uint32_t> slots;
            for (const auto& var : rule->vars) {
                const std::string* id = bound_id(step.bindings, var);
                if (!id) return fail(pos, "unbound rule variable " + var);
                auto o = k.find_object(*id);
                if (!o) return fail(pos, "unknown object " + *id);
                slots.push_back(*o);
            }
            for (const auto& a : rule->pre)
                if (!holds(a.relation, slots[a.first], slots[a.second]))
                    return fail(pos, "rule precondition " + ont.relations()[a.relation].name + " does not hold");
            for (const auto& a : rule->eff) k.add_triple({a.relation, slots[a.first], slots[a.second]});
        }
        close_properties(k, ont);
    }

    // Goal: exhaustive search over the required slots with known slots fixed.
    const RelService& g = inst.goal;
    std::vector<std::uint32_t> slots(g.slot_names.size(), 0);
    for (std::size_t i = 0; i < seed.size(); ++i) slots[i] = seed[i];
    std::function<bool(std::size_t)> search = [&](std::size_t level) -> bool {
        auto consistent = [&](std::size_t upto) {
            for (const auto& a : g.preconditions)
                if (a.first < upto && a.second < upto && !holds(a.relation, slots[a.first], slots[a.second]))
                    return false;
            return true;
        };
        if (level == slots.size()) return consistent(level);
        if (level < seed.size()) return consistent(level + 1) && search(level + 1);
        for (std::uint32_t o = 0; o < k.object_count(); ++o) {
            if (!ont.is_subtype(k.object(o).type, g.slot_types[level])) continue;
            slots[level] = o;
            if (consistent(level + 1) && search(level + 1)) return true;
        }
        return false;
    };
    report.goal_covered = search(0);
    report.valid = report.goal_covered;
    return report;
}

}  // namespace wsc

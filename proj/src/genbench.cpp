#include "wsc/genbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

namespace wsc::gen {

using io::Json;

// ---- rng ----

std::uint64_t Rng::phase_seed(std::uint64_t seed, std::uint64_t phase) {
    // splitmix64 over seed and phase
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (phase + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % n + 1) % n;
    std::uint64_t x;
    do x = engine_();
    while (x > limit);
    return x % n;
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

bool Rng::chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

std::vector<std::size_t> Rng::distinct(std::size_t k, std::size_t n) {
    if (k > n) throw std::invalid_argument("Rng::distinct: k > n");
    std::vector<std::size_t> out;
    out.reserve(k);
    if (k * 4 >= n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(all[i], all[i + below(n - i)]);
            out.push_back(all[i]);
        }
        return out;
    }
    std::unordered_set<std::size_t> seen;
    while (out.size() < k) {
        std::size_t v = below(n);
        if (seen.insert(v).second) out.push_back(v);
    }
    return out;
}

// ---- config ----

namespace {

enum Phase : std::uint64_t { kServices = 1, kInit, kChain, kRewire, kGoal, kTaxonomy, kNoise, kGadget, kShuffle, kQueries };

template <typename T>
void read(const Json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

std::string num(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

}  // namespace

GenConfig parse_config(const Json& j) {
    static const std::set<std::string> known{
        "numWebServices", "parsPerService", "numParameters", "numWSinSolution", "seed",
        "taxonomySize",   "taxonomyShape",  "stageCount",    "relationCount",   "noiseRatio",
        "plantedRules",   "conceptCount",   "propertyCount", "queryCount"};
    if (!j.is_object()) throw io::InputError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw io::InputError("unknown config key: " + key);
    GenConfig cfg;
    try {
        read(j, "numWebServices", cfg.num_web_services);
        read(j, "parsPerService", cfg.pars_per_service);
        read(j, "numParameters", cfg.num_parameters);
        read(j, "numWSinSolution", cfg.num_ws_in_solution);
        read(j, "seed", cfg.seed);
        read(j, "taxonomySize", cfg.taxonomy_size);
        read(j, "taxonomyShape", cfg.taxonomy_shape);
        read(j, "stageCount", cfg.stage_count);
        read(j, "relationCount", cfg.relation_count);
        read(j, "noiseRatio", cfg.noise_ratio);
        read(j, "plantedRules", cfg.planted_rules);
        read(j, "conceptCount", cfg.concept_count);
        read(j, "propertyCount", cfg.property_count);
        read(j, "queryCount", cfg.query_count);
    } catch (const Json::exception& e) {
        throw io::InputError(std::string("config: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

Json to_json(const GenConfig& cfg) {
    return Json{{"numWebServices", cfg.num_web_services},
                {"parsPerService", cfg.pars_per_service},
                {"numParameters", cfg.num_parameters},
                {"numWSinSolution", cfg.num_ws_in_solution},
                {"seed", cfg.seed},
                {"taxonomySize", cfg.taxonomy_size},
                {"taxonomyShape", cfg.taxonomy_shape},
                {"stageCount", cfg.stage_count},
                {"relationCount", cfg.relation_count},
                {"noiseRatio", cfg.noise_ratio},
                {"plantedRules", cfg.planted_rules},
                {"conceptCount", cfg.concept_count},
                {"propertyCount", cfg.property_count},
                {"queryCount", cfg.query_count}};
}

void check_config(const GenConfig& cfg) {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw io::InputError(std::string("config: ") + msg);
    };
    require(cfg.num_web_services >= 1 && cfg.pars_per_service >= 1 && cfg.num_parameters >= 1 &&
                cfg.num_ws_in_solution >= 1,
            "all counts must be at least 1");
    require(cfg.num_ws_in_solution <= cfg.num_web_services, "numWSinSolution exceeds numWebServices");
    require(cfg.num_parameters >= 2 * cfg.pars_per_service, "numParameters must be at least 2 * parsPerService");
    require(cfg.taxonomy_size >= 1, "taxonomySize must be at least 1");
    require(cfg.taxonomy_shape == "random" || cfg.taxonomy_shape == "flat" || cfg.taxonomy_shape == "chain",
            "taxonomyShape must be random, flat or chain");
    require(cfg.stage_count >= 2, "stageCount must be at least 2");
    require(cfg.noise_ratio >= 0.0, "noiseRatio must be nonnegative");
    require(cfg.concept_count >= 1 && cfg.property_count >= 1, "conceptCount and propertyCount must be at least 1");
    require(cfg.query_count >= 1, "queryCount must be at least 1");
}

Json to_json(const GroundTruth& truth) {
    Json j{{"plantedChain", truth.planted_chain}};
    if (!truth.stage_boundaries.empty()) j["stageBoundaries"] = truth.stage_boundaries;
    if (!truth.planted_composition.is_null()) j["plantedComposition"] = truth.planted_composition;
    if (!truth.query_chains.empty()) {
        Json chains = Json::object();
        for (const auto& [q, chain] : truth.query_chains) chains[q] = chain;
        j["queryChains"] = chains;
    }
    if (!truth.backups.empty()) {
        Json list = Json::array();
        for (const auto& b : truth.backups) list.push_back({{"query", b.query}, {"service", b.service}, {"type", b.type}});
        j["backups"] = list;
    }
    if (!truth.deletions.empty()) {
        Json list = Json::array();
        for (const auto& d : truth.deletions)
            list.push_back({{"service", d.service}, {"query", d.query}, {"expectedEvent", d.expected_event}});
        j["deletions"] = list;
    }
    return j;
}

// ---- name model ----

namespace {

// Parameter-index skeleton shared by the name and hierarchical generators.
struct Skeleton {
    std::vector<std::vector<std::size_t>> in, out;
    std::vector<std::size_t> init, goal, chain;
};

void random_services(const GenConfig& cfg, Skeleton& s) {
    Rng rng(Rng::phase_seed(cfg.seed, kServices));
    s.in.resize(cfg.num_web_services);
    s.out.resize(cfg.num_web_services);
    for (std::size_t i = 0; i < cfg.num_web_services; ++i) {
        std::size_t kin = rng.between(1, cfg.pars_per_service);
        std::size_t kout = rng.between(1, cfg.pars_per_service);
        auto params = rng.distinct(kin + kout, cfg.num_parameters);
        s.in[i].assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(kin));
        s.out[i].assign(params.begin() + static_cast<std::ptrdiff_t>(kin), params.end());
    }
}

std::vector<std::size_t> pick_from(Rng& rng, const std::vector<std::size_t>& pool, std::size_t k) {
    std::vector<std::size_t> out;
    for (auto idx : rng.distinct(std::min(k, pool.size()), pool.size())) out.push_back(pool[idx]);
    return out;
}

void sort_unique(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Drops outputs that are also inputs; keeps at least one output.
void separate_outputs(Rng& rng, std::vector<std::size_t>& in, std::vector<std::size_t>& out, std::size_t universe) {
    std::erase_if(out, [&](std::size_t p) { return std::find(in.begin(), in.end(), p) != in.end(); });
    while (out.empty()) {
        std::size_t p = rng.below(universe);
        if (std::find(in.begin(), in.end(), p) == in.end()) out.push_back(p);
    }
}

// Rewires chain inputs. `generalize` maps a known parameter to the parameter
// actually requested (identity in the name model).
template <typename Generalize>
void plant_chain(const GenConfig& cfg, Skeleton& s, Generalize&& generalize) {
    {
        Rng rng(Rng::phase_seed(cfg.seed, kInit));
        s.init = rng.distinct(rng.between(1, cfg.pars_per_service), cfg.num_parameters);
    }
    {
        Rng rng(Rng::phase_seed(cfg.seed, kChain));
        s.chain = rng.distinct(cfg.num_ws_in_solution, cfg.num_web_services);
    }
    Rng rng(Rng::phase_seed(cfg.seed, kRewire));
    std::vector<std::size_t> pool = s.init;
    std::vector<char> pooled(cfg.num_parameters, 0);
    for (auto p : pool) pooled[p] = 1;
    for (std::size_t svc : s.chain) {
        std::vector<std::size_t> inputs;
        for (auto p : pick_from(rng, pool, s.in[svc].size())) inputs.push_back(generalize(rng, p));
        sort_unique(inputs);
        s.in[svc] = std::move(inputs);
        separate_outputs(rng, s.in[svc], s.out[svc], cfg.num_parameters);
        for (auto p : s.out[svc])
            if (!pooled[p]) pooled[p] = 1, pool.push_back(p);
    }
    Rng goal_rng(Rng::phase_seed(cfg.seed, kGoal));
    std::vector<std::size_t> candidates(pool.begin() + static_cast<std::ptrdiff_t>(s.init.size()), pool.end());
    if (candidates.empty()) candidates = pool;
    for (auto p : pick_from(goal_rng, candidates, goal_rng.between(1, cfg.pars_per_service)))
        s.goal.push_back(generalize(goal_rng, p));
    sort_unique(s.goal);
    sort_unique(s.init);
    for (auto& v : s.in) sort_unique(v);
    for (auto& v : s.out) sort_unique(v);
}

Json names_json(const std::vector<std::size_t>& ids, const std::vector<std::string>& names) {
    Json out = Json::array();
    for (auto i : ids) out.push_back(names[i]);
    return out;
}

Json skeleton_json(const Skeleton& s, const std::vector<std::string>& params, const std::vector<std::string>& services) {
    Json list = Json::array();
    for (std::size_t i = 0; i < services.size(); ++i)
        list.push_back({{"name", services[i]}, {"in", names_json(s.in[i], params)}, {"out", names_json(s.out[i], params)}});
    return Json{{"services", list},
                {"query", {{"known", names_json(s.init, params)}, {"required", names_json(s.goal, params)}}}};
}

std::vector<std::string> numbered(const char* prefix, std::size_t n, std::size_t first = 0) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(num(prefix, i + first));
    return out;
}

}  // namespace

Generated generate_name_instance(const GenConfig& cfg) {
    check_config(cfg);
    Skeleton s;
    random_services(cfg, s);
    plant_chain(cfg, s, [](Rng&, std::size_t p) { return p; });
    auto params = numbered("p", cfg.num_parameters);
    auto services = numbered("ws", cfg.num_web_services, 1);

    Generated g;
    g.instance = skeleton_json(s, params, services);
    g.instance["model"] = "name";
    for (auto svc : s.chain) g.truth.planted_chain.push_back(services[svc]);
    g.truth.planted_composition = Json{{"calls", g.truth.planted_chain}};
    return g;
}

// ---- hierarchical ----

Generated generate_hierarchical_instance(const GenConfig& cfg) {
    check_config(cfg);
    const bool flat = cfg.taxonomy_shape == "flat";
    const std::size_t concepts = flat ? cfg.num_parameters : cfg.taxonomy_size;

    std::vector<std::int64_t> parent(concepts, -1);
    std::vector<std::size_t> concept_of(cfg.num_parameters);
    {
        Rng rng(Rng::phase_seed(cfg.seed, kTaxonomy));
        for (std::size_t c = 1; c < concepts && !flat; ++c) {
            if (cfg.taxonomy_shape == "chain")
                parent[c] = static_cast<std::int64_t>(c - 1);
            else if (!rng.chance(0.05))
                parent[c] = static_cast<std::int64_t>(rng.below(c));
        }
        for (std::size_t i = 0; i < cfg.num_parameters; ++i)
            concept_of[i] = i < concepts ? i : rng.below(concepts);
    }
    std::vector<std::vector<std::size_t>> members(concepts);
    for (std::size_t i = 0; i < cfg.num_parameters; ++i) members[concept_of[i]].push_back(i);

    // A requested instance may belong to any ancestor-or-self concept of a known one.
    auto generalize = [&](Rng& rng, std::size_t inst) {
        std::vector<std::size_t> options;
        for (auto c = static_cast<std::int64_t>(concept_of[inst]); c >= 0; c = parent[c])
            if (!members[c].empty()) options.push_back(static_cast<std::size_t>(c));
        return rng.pick(members[rng.pick(options)]);
    };

    Skeleton s;
    random_services(cfg, s);
    plant_chain(cfg, s, generalize);

    auto inst_names = numbered("i", cfg.num_parameters);
    auto concept_names = numbered("c", concepts);
    auto services = numbered("ws", cfg.num_web_services, 1);

    Generated g;
    g.instance = skeleton_json(s, inst_names, services);
    g.instance["model"] = "hierarchical";
    Json cs = Json::array();
    for (std::size_t c = 0; c < concepts; ++c) {
        Json d{{"name", concept_names[c]}};
        if (parent[c] >= 0) d["parent"] = concept_names[static_cast<std::size_t>(parent[c])];
        cs.push_back(d);
    }
    Json is = Json::array();
    for (std::size_t i = 0; i < cfg.num_parameters; ++i)
        is.push_back({{"name", inst_names[i]}, {"concept", concept_names[concept_of[i]]}});
    g.instance["taxonomy"] = {{"concepts", cs}, {"instances", is}};
    for (auto svc : s.chain) g.truth.planted_chain.push_back(services[svc]);
    g.truth.planted_composition = Json{{"calls", g.truth.planted_chain}};
    return g;
}

// ---- relational ----

namespace {

struct RelObj {
    std::string type;
    std::int64_t producer = -1;  // service index, -1 for query objects
    std::string param;           // producing output parameter, or the query parameter name
};

struct RelTriple {
    std::string relation;
    std::size_t first, second;
};

struct RelSvc {
    std::vector<std::pair<std::string, std::size_t>> inputs;   // param -> object
    std::vector<std::pair<std::string, std::size_t>> outputs;  // param -> object
    std::vector<RelTriple> rel;                                // over objects
    std::vector<std::pair<std::string, std::string>> noise_in, noise_out;  // param -> type (noise only)
    std::vector<std::array<std::string, 3>> noise_rel;
    bool noise = false;
    std::string name;
};

}  // namespace

Generated generate_relational_instance(const GenConfig& cfg) {
    check_config(cfg);
    Rng rng(Rng::phase_seed(cfg.seed, kServices));
    const std::size_t k = cfg.pars_per_service;

    std::vector<RelObj> objs;
    std::vector<std::string> concept_names;
    auto new_object = [&](std::int64_t producer, std::string param) {
        std::string type = num("T", concept_names.size());
        concept_names.push_back(type);
        objs.push_back({type, producer, std::move(param)});
        return objs.size() - 1;
    };
    std::vector<std::string> relations = numbered("rel", cfg.relation_count);
    std::vector<RelTriple> triples;
    std::vector<int> stage_of;

    // Stage 0: the known objects.
    std::size_t known_count = rng.between(2, std::max<std::size_t>(2, k));
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < known_count; ++i) {
        known.push_back(new_object(-1, num("k", i)));
        stage_of.push_back(0);
    }
    if (!relations.empty()) {
        for (std::size_t i = 1; i < known_count; ++i) {
            std::size_t a = known[i], b = known[rng.below(i)];
            if (rng.chance(0.5)) std::swap(a, b);
            triples.push_back({rng.pick(relations), a, b});
        }
    }

    std::vector<RelSvc> services;
    std::vector<std::size_t> stage_services;  // real services in stage order
    std::vector<std::size_t> boundaries;
    const std::size_t layers = cfg.stage_count - 1;
    const std::size_t per_layer = std::max<std::size_t>(1, cfg.num_web_services / layers);
    for (std::size_t layer = 0; layer < layers; ++layer) {
        boundaries.push_back(stage_services.size());
        std::vector<std::size_t> available, frontier;
        for (std::size_t o = 0; o < objs.size(); ++o) {
            if (stage_of[o] <= static_cast<int>(layer)) available.push_back(o);
            if (stage_of[o] == static_cast<int>(layer)) frontier.push_back(o);
        }
        const std::size_t triples_before = triples.size();
        for (std::size_t n = 0; n < per_layer; ++n) {
            RelSvc svc;
            const auto self = static_cast<std::int64_t>(services.size());
            std::vector<std::size_t> ins{rng.pick(frontier)};
            for (std::size_t extra = rng.below(k); extra > 0; --extra) {
                std::size_t o = rng.pick(available);
                if (std::find(ins.begin(), ins.end(), o) == ins.end()) ins.push_back(o);
            }
            for (std::size_t i = 0; i < ins.size(); ++i) svc.inputs.emplace_back(num("in", i), ins[i]);

            std::vector<const RelTriple*> usable;
            for (std::size_t t = 0; t < triples_before; ++t) {
                const auto& tr = triples[t];
                bool a = std::find(ins.begin(), ins.end(), tr.first) != ins.end();
                bool b = std::find(ins.begin(), ins.end(), tr.second) != ins.end();
                if (a && b) usable.push_back(&tr);
            }
            for (std::size_t c = std::min<std::size_t>(2, usable.size()); c > 0; --c) {
                const RelTriple* tr = usable[rng.below(usable.size())];
                bool dup = std::any_of(svc.rel.begin(), svc.rel.end(), [&](const RelTriple& r) {
                    return r.relation == tr->relation && r.first == tr->first && r.second == tr->second;
                });
                if (!dup) svc.rel.push_back(*tr);
            }

            std::vector<std::size_t> outs;
            for (std::size_t i = 0, n_out = rng.between(1, k); i < n_out; ++i) {
                outs.push_back(new_object(self, num("out", i)));
                stage_of.push_back(static_cast<int>(layer) + 1);
                svc.outputs.emplace_back(num("out", i), outs.back());
            }
            if (!relations.empty()) {
                for (std::size_t e = rng.between(1, 2); e > 0; --e) {
                    std::size_t a = rng.pick(outs);
                    std::vector<std::size_t> others = ins;
                    for (auto o : outs)
                        if (o != a) others.push_back(o);
                    std::size_t b = rng.pick(others);
                    if (rng.chance(0.5)) std::swap(a, b);
                    RelTriple t{rng.pick(relations), a, b};
                    svc.rel.push_back(t);
                    triples.push_back(t);
                }
            }
            stage_services.push_back(services.size());
            services.push_back(std::move(svc));
        }
    }

    // Required objects come from the final stage.
    std::vector<std::size_t> last;
    for (std::size_t o = 0; o < objs.size(); ++o)
        if (stage_of[o] == static_cast<int>(layers)) last.push_back(o);
    std::vector<std::size_t> required = pick_from(rng, last, rng.between(1, std::min(k, last.size())));
    std::vector<RelTriple> query_rel;
    for (const auto& t : triples) {
        bool fk = std::find(known.begin(), known.end(), t.first) != known.end();
        bool sk = std::find(known.begin(), known.end(), t.second) != known.end();
        if (fk && sk) query_rel.push_back(t);
    }
    {
        std::vector<std::size_t> scope = known;
        scope.insert(scope.end(), required.begin(), required.end());
        std::vector<const RelTriple*> constraints;
        for (const auto& t : triples) {
            bool fr = std::find(required.begin(), required.end(), t.first) != required.end();
            bool sr = std::find(required.begin(), required.end(), t.second) != required.end();
            bool fs = std::find(scope.begin(), scope.end(), t.first) != scope.end();
            bool ss = std::find(scope.begin(), scope.end(), t.second) != scope.end();
            if ((fr || sr) && fs && ss) constraints.push_back(&t);
        }
        for (std::size_t c = std::min<std::size_t>(2, constraints.size()); c > 0; --c) {
            std::size_t idx = rng.below(constraints.size());
            query_rel.push_back(*constraints[idx]);
            constraints.erase(constraints.begin() + static_cast<std::ptrdiff_t>(idx));
        }
    }
    std::map<std::size_t, std::string> required_param;
    for (std::size_t i = 0; i < required.size(); ++i) required_param[required[i]] = num("r", i);

    // Planted rule gadget: a one-service shortcut that only the rule makes acceptable.
    std::vector<std::string> gadget_relations;
    Json rules = Json::array();
    std::optional<std::size_t> shortcut_service;
    std::vector<std::size_t> gadget_path;
    std::size_t gadget_y = 0, gadget_x = 0;
    if (cfg.planted_rules) {
        Rng grng(Rng::phase_seed(cfg.seed, kGadget));
        gadget_relations = {"gadgetLink", "gadgetStep", "gadgetGoal"};
        const std::size_t p0 = known.front();
        RelSvc& py = services[stage_services.front()];
        bool has_p0 = std::any_of(py.inputs.begin(), py.inputs.end(), [&](const auto& in) { return in.second == p0; });
        if (!has_p0) py.inputs.emplace_back(num("in", py.inputs.size()), p0);
        std::string y_param = num("out", py.outputs.size());
        gadget_y = new_object(static_cast<std::int64_t>(stage_services.front()), y_param);
        stage_of.push_back(1);
        py.outputs.emplace_back(y_param, gadget_y);
        py.rel.push_back({"gadgetLink", p0, gadget_y});

        RelSvc shortcut;
        shortcut.inputs.emplace_back("in0", gadget_y);
        gadget_x = new_object(static_cast<std::int64_t>(services.size()), "out0");
        stage_of.push_back(2);
        shortcut.outputs.emplace_back("out0", gadget_x);
        shortcut.rel.push_back({"gadgetStep", gadget_y, gadget_x});
        shortcut_service = services.size();
        services.push_back(std::move(shortcut));

        const std::string x_type = objs[gadget_x].type;
        std::size_t prev = p0;
        for (std::size_t i = 0, len = grng.between(3, 5); i < len; ++i) {
            RelSvc step;
            step.inputs.emplace_back("in0", prev);
            const auto self = static_cast<std::int64_t>(services.size());
            std::size_t o;
            if (i + 1 == len) {
                if (prev != p0) step.inputs.emplace_back("in1", p0);
                objs.push_back({x_type, self, "out0"});
                stage_of.push_back(static_cast<int>(i) + 1);
                o = objs.size() - 1;
                step.rel.push_back({"gadgetGoal", p0, o});
            } else {
                o = new_object(self, "out0");
                stage_of.push_back(static_cast<int>(i) + 1);
            }
            step.outputs.emplace_back("out0", o);
            gadget_path.push_back(services.size());
            services.push_back(std::move(step));
            prev = o;
        }
        required_param[gadget_x] = num("r", required.size());
        required.push_back(gadget_x);
        query_rel.push_back({"gadgetGoal", p0, gadget_x});
        rules.push_back({{"name", "gadgetRule"},
                         {"params", {"A", "B", "C"}},
                         {"pre", {{"gadgetLink", "A", "B"}, {"gadgetStep", "B", "C"}}},
                         {"eff", {{"gadgetGoal", "A", "C"}}}});
    }

    // Noise: services over fresh concepts, some fed by real objects.
    std::vector<std::string> noise_types;
    {
        Rng nrng(Rng::phase_seed(cfg.seed, kNoise));
        const auto noise = static_cast<std::size_t>(std::llround(cfg.noise_ratio * static_cast<double>(stage_services.size())));
        for (std::size_t n = 0; n < noise; ++n) {
            RelSvc svc;
            svc.noise = true;
            svc.noise_in.emplace_back("in0", objs[nrng.below(objs.size())].type);
            if (!noise_types.empty() && nrng.chance(0.5)) svc.noise_in.emplace_back("in1", nrng.pick(noise_types));
            for (std::size_t i = 0, n_out = nrng.between(1, k); i < n_out; ++i) {
                noise_types.push_back(num("N", noise_types.size()));
                svc.noise_out.emplace_back(num("out", i), noise_types.back());
            }
            if (!relations.empty())
                svc.noise_rel.push_back({nrng.pick(relations), "in0", svc.noise_out.front().first});
            services.push_back(std::move(svc));
        }
    }

    // Shuffle declaration order, then name services by position.
    std::vector<std::size_t> order(services.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    {
        Rng srng(Rng::phase_seed(cfg.seed, kShuffle));
        srng.shuffle(order);
    }
    for (std::size_t pos = 0; pos < order.size(); ++pos) services[order[pos]].name = num("ws", pos + 1);

    auto object_id = [&](std::size_t o) {
        const RelObj& obj = objs[o];
        if (obj.producer < 0) return obj.param;
        return services[static_cast<std::size_t>(obj.producer)].name + "." + obj.param + "#1";
    };
    auto param_of = [](const RelSvc& svc, std::size_t o) -> std::string {
        for (const auto& [p, obj] : svc.inputs)
            if (obj == o) return p;
        for (const auto& [p, obj] : svc.outputs)
            if (obj == o) return p;
        throw std::logic_error("object not bound by service");
    };

    Json service_list = Json::array();
    for (std::size_t idx : order) {
        const RelSvc& svc = services[idx];
        Json in = Json::array(), out = Json::array(), rel = Json::array();
        if (svc.noise) {
            for (const auto& [p, t] : svc.noise_in) in.push_back({{"name", p}, {"type", t}});
            for (const auto& [p, t] : svc.noise_out) out.push_back({{"name", p}, {"type", t}});
            for (const auto& r : svc.noise_rel) rel.push_back({r[0], r[1], r[2]});
        } else {
            for (const auto& [p, o] : svc.inputs) in.push_back({{"name", p}, {"type", objs[o].type}});
            for (const auto& [p, o] : svc.outputs) out.push_back({{"name", p}, {"type", objs[o].type}});
            for (const auto& r : svc.rel) rel.push_back({r.relation, param_of(svc, r.first), param_of(svc, r.second)});
        }
        service_list.push_back({{"name", svc.name}, {"in", in}, {"out", out}, {"rel", rel}});
    }

    auto query_name = [&](std::size_t o) {
        auto it = required_param.find(o);
        return it != required_param.end() ? it->second : objs[o].param;
    };
    Json qk = Json::array(), qr = Json::array(), qrel = Json::array();
    for (auto o : known) qk.push_back({{"name", objs[o].param}, {"type", objs[o].type}});
    for (auto o : required) qr.push_back({{"name", required_param[o]}, {"type", objs[o].type}});
    for (const auto& t : query_rel) qrel.push_back({t.relation, query_name(t.first), query_name(t.second)});

    Json concepts = Json::array({Json{{"name", "Thing"}}});
    for (const auto& c : concept_names) concepts.push_back({{"name", c}, {"parent", "Thing"}});
    for (const auto& c : noise_types) concepts.push_back({{"name", c}, {"parent", "Thing"}});
    Json rel_decls = Json::array();
    for (const auto& r : relations) rel_decls.push_back({{"name", r}});
    for (const auto& r : gadget_relations) rel_decls.push_back({{"name", r}});

    Generated g;
    g.instance = Json{{"model", "relational"},
                      {"taxonomy", {{"concepts", concepts}}},
                      {"relations", rel_decls},
                      {"rules", rules},
                      {"services", service_list},
                      {"query", {{"known", qk}, {"required", qr}, {"rel", qrel}}}};

    // Planted composition: every staged service in stage order, then the shortcut and rule.
    Json calls = Json::array();
    auto call_json = [&](std::size_t idx) {
        const RelSvc& svc = services[idx];
        Json b = Json::object(), o = Json::object();
        for (const auto& [p, obj] : svc.inputs) b[p] = object_id(obj);
        for (const auto& [p, obj] : svc.outputs) o[p] = object_id(obj);
        g.truth.planted_chain.push_back(svc.name);
        return Json{{"service", svc.name}, {"bindings", b}, {"outputs", o}};
    };
    for (auto idx : stage_services) calls.push_back(call_json(idx));
    g.truth.stage_boundaries = boundaries;
    if (shortcut_service) {
        calls.push_back(call_json(*shortcut_service));
        calls.push_back({{"rule", "gadgetRule"},
                         {"bindings",
                          {{"A", object_id(known.front())}, {"B", object_id(gadget_y)}, {"C", object_id(gadget_x)}}}});
    }
    Json goal_binding = Json::object();
    for (auto o : known) goal_binding[objs[o].param] = object_id(o);
    for (auto o : required) goal_binding[required_param[o]] = object_id(o);
    g.truth.planted_composition = Json{{"calls", calls}, {"goalBinding", goal_binding}};
    return g;
}

// ---- object-oriented ----

Generated generate_oo_instance(const GenConfig& cfg) {
    check_config(cfg);
    const std::size_t nc = cfg.concept_count, np = cfg.property_count, k = cfg.pars_per_service;
    std::vector<std::int64_t> parent(nc, -1);
    std::vector<std::size_t> definer(np);
    {
        Rng rng(Rng::phase_seed(cfg.seed, kTaxonomy));
        for (std::size_t c = 1; c < nc; ++c)
            if (!rng.chance(0.2)) parent[c] = static_cast<std::int64_t>(rng.below(c));
        for (std::size_t p = 0; p < np; ++p) definer[p] = rng.below(nc);
    }
    auto ancestors = [&](std::size_t c) {
        std::vector<std::size_t> out;
        for (auto a = static_cast<std::int64_t>(c); a >= 0; a = parent[a]) out.push_back(static_cast<std::size_t>(a));
        return out;
    };
    std::vector<std::vector<std::size_t>> props_of(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        auto anc = ancestors(c);
        for (std::size_t p = 0; p < np; ++p)
            if (std::find(anc.begin(), anc.end(), definer[p]) != anc.end()) props_of[c].push_back(p);
    }

    using Partial = std::pair<std::size_t, std::vector<std::size_t>>;
    auto subset = [&](Rng& rng, const std::vector<std::size_t>& from) {
        std::vector<std::size_t> out = pick_from(rng, from, from.empty() ? 0 : rng.between(1, std::min<std::size_t>(3, from.size())));
        sort_unique(out);
        return out;
    };
    auto merge = [](std::vector<Partial>& list) {
        std::map<std::size_t, std::vector<std::size_t>> by;
        for (auto& [c, ps] : list) {
            auto& dst = by[c];
            dst.insert(dst.end(), ps.begin(), ps.end());
            sort_unique(dst);
        }
        list.assign(by.begin(), by.end());
    };
    auto random_partials = [&](Rng& rng) {
        std::vector<Partial> out;
        for (std::size_t i = 0, n = rng.between(1, k); i < n; ++i) {
            std::size_t c = rng.below(nc);
            out.emplace_back(c, subset(rng, props_of[c]));
        }
        merge(out);
        return out;
    };

    std::vector<std::vector<Partial>> in(cfg.num_web_services), out(cfg.num_web_services);
    {
        Rng rng(Rng::phase_seed(cfg.seed, kServices));
        for (std::size_t s = 0; s < cfg.num_web_services; ++s) {
            in[s] = random_partials(rng);
            out[s] = random_partials(rng);
        }
    }
    std::vector<Partial> init;
    {
        Rng rng(Rng::phase_seed(cfg.seed, kInit));
        init = random_partials(rng);
    }
    std::vector<std::size_t> chain;
    {
        Rng rng(Rng::phase_seed(cfg.seed, kChain));
        chain = rng.distinct(cfg.num_ws_in_solution, cfg.num_web_services);
    }
    // Rebuilt inputs ask for a generalization of something already produced.
    auto generalize = [&](Rng& rng, const Partial& known) {
        std::size_t a = rng.pick(ancestors(known.first));
        std::vector<std::size_t> visible;
        for (auto p : known.second)
            if (std::binary_search(props_of[a].begin(), props_of[a].end(), p)) visible.push_back(p);
        return Partial{a, subset(rng, visible)};
    };
    std::vector<Partial> goal;
    {
        Rng rng(Rng::phase_seed(cfg.seed, kRewire));
        std::vector<Partial> pool = init;
        for (std::size_t s : chain) {
            std::vector<Partial> rebuilt;
            for (std::size_t i = 0; i < in[s].size(); ++i) rebuilt.push_back(generalize(rng, rng.pick(pool)));
            merge(rebuilt);
            in[s] = std::move(rebuilt);
            pool.insert(pool.end(), out[s].begin(), out[s].end());
        }
        Rng grng(Rng::phase_seed(cfg.seed, kGoal));
        std::vector<Partial> produced(pool.begin() + static_cast<std::ptrdiff_t>(init.size()), pool.end());
        for (std::size_t i = 0, n = grng.between(1, k); i < n; ++i) goal.push_back(generalize(grng, grng.pick(produced)));
        merge(goal);
    }

    auto concept_name = [](std::size_t c) { return num("C", c); };
    auto prop_name = [](std::size_t p) { return num("prop", p); };
    auto partials_json = [&](const std::vector<Partial>& list) {
        Json arr = Json::array();
        for (const auto& [c, ps] : list) {
            Json props = Json::array();
            for (auto p : ps) props.push_back(prop_name(p));
            arr.push_back({{"concept", concept_name(c)}, {"props", props}});
        }
        return arr;
    };
    Json concepts = Json::array();
    for (std::size_t c = 0; c < nc; ++c) {
        Json props = Json::array();
        for (std::size_t p = 0; p < np; ++p)
            if (definer[p] == c) props.push_back({{"name", prop_name(p)}, {"type", concept_name((c + p) % nc)}});
        Json d{{"name", concept_name(c)}, {"props", props}};
        if (parent[c] >= 0) d["parent"] = concept_name(static_cast<std::size_t>(parent[c]));
        concepts.push_back(d);
    }
    auto services = numbered("ws", cfg.num_web_services, 1);
    Json list = Json::array();
    for (std::size_t s = 0; s < cfg.num_web_services; ++s)
        list.push_back({{"name", services[s]}, {"in", partials_json(in[s])}, {"out", partials_json(out[s])}});

    Generated g;
    g.instance = Json{{"model", "oo"},
                      {"conceptTree", {{"concepts", concepts}}},
                      {"services", list},
                      {"query", {{"known", partials_json(init)}, {"required", partials_json(goal)}}}};
    for (auto s : chain) g.truth.planted_chain.push_back(services[s]);
    g.truth.planted_composition = Json{{"calls", g.truth.planted_chain}};
    return g;
}

// ---- online ----

Generated generate_online_scenario(const GenConfig& cfg) {
    check_config(cfg);
    const std::size_t len = std::max<std::size_t>(2, cfg.num_ws_in_solution);
    const std::size_t k = cfg.pars_per_service;
    Rng rng(Rng::phase_seed(cfg.seed, kQueries));

    std::size_t next_param = 0;
    auto fresh = [&] {
        if (next_param >= cfg.num_parameters) throw io::InputError("config: numParameters too small for the scenario");
        return num("p", next_param++);
    };
    struct Svc {
        std::string name;
        std::vector<std::string> in, out;
    };
    std::vector<Svc> main_services, alt_services;
    Json queries = Json::array();
    std::vector<Json> query_events;
    Generated g;

    for (std::size_t q = 0; q < cfg.query_count; ++q) {
        const std::string qid = num("q", q);
        const std::size_t kind = q % 3;  // 0: swap, 1: backup recompute, 2: re-solve

        std::vector<std::string> tokens{fresh()};
        std::vector<std::string> known_extra;
        for (std::size_t e = rng.below(k); e > 0; --e) known_extra.push_back(fresh());
        for (std::size_t i = 1; i <= len; ++i) tokens.push_back(fresh());

        std::vector<std::string> chain;
        for (std::size_t i = 1; i <= len; ++i) {
            Svc s{num("x", q) + "_" + std::to_string(i), {tokens[i - 1]}, {tokens[i]}};
            for (const auto& p : known_extra)
                if (rng.chance(0.5)) s.in.push_back(p);
            for (std::size_t e = rng.below(k); e > 0; --e) s.out.push_back(fresh());
            chain.push_back(s.name);
            main_services.push_back(std::move(s));
        }

        // Type-1 alternative for one position, type-2 suffix from another.
        const std::size_t y_pos = kind == 2 ? rng.between(2, len) : rng.between(1, len);
        const std::size_t z_pos = rng.between(2, len);
        std::vector<std::string> y_names;
        {
            std::size_t y_len = rng.between(1, 2);
            std::string prev = tokens[y_pos - 1];
            for (std::size_t i = 1; i <= y_len; ++i) {
                std::string o = i == y_len ? tokens[y_pos] : fresh();
                Svc s{num("y", q) + "_" + std::to_string(i), {prev}, {o}};
                y_names.push_back(s.name);
                alt_services.push_back(std::move(s));
                prev = o;
            }
        }
        {
            std::size_t z_len = len - z_pos + 2 + rng.below(2);
            std::string prev = tokens[z_pos - 1];
            for (std::size_t i = 1; i <= z_len; ++i) {
                std::string o = i == z_len ? tokens[len] : fresh();
                alt_services.push_back(Svc{num("z", q) + "_" + std::to_string(i), {prev}, {o}});
                prev = o;
            }
        }

        for (std::size_t i = 1; i <= len; ++i) {
            int type = 0;
            if (i == y_pos || i == len)
                type = 1;  // the suffix is empty at the last position, so the suffix path counts as type-1
            else if (i >= z_pos)
                type = 2;
            if (type) g.truth.backups.push_back({qid, chain[i - 1], type});
        }
        g.truth.query_chains.emplace_back(qid, chain);

        std::vector<std::string> known{tokens[0]};
        known.insert(known.end(), known_extra.begin(), known_extra.end());
        query_events.push_back({{"op", "find_composition"}, {"id", qid}, {"known", known}, {"required", {tokens[len]}}});
        queries.push_back({{"id", qid}, {"known", known}, {"required", {tokens[len]}}});

        if (kind == 0)
            g.truth.deletions.push_back({chain[y_pos - 1], qid, "swapped_to_backup"});
        else if (kind == 1)
            g.truth.deletions.push_back({y_names.front(), qid, "backup_recomputed"});
        else
            g.truth.deletions.push_back({chain.front(), qid, "request_lost"});
    }

    // Inert noise over a separate parameter pool.
    Rng nrng(Rng::phase_seed(cfg.seed, kNoise));
    std::vector<std::string> noise_pool;
    while (next_param < cfg.num_parameters && noise_pool.size() < 4 * k + 2) noise_pool.push_back(fresh());
    const std::size_t real = main_services.size() + alt_services.size();
    for (std::size_t n = 0; real + n < cfg.num_web_services && noise_pool.size() >= 2; ++n) {
        Svc s{num("n", n), {}, {}};
        auto idx = nrng.distinct(std::min(noise_pool.size(), nrng.between(2, 2 * k)), noise_pool.size());
        std::size_t split = 1 + nrng.below(idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) (i < split ? s.in : s.out).push_back(noise_pool[idx[i]]);
        alt_services.push_back(std::move(s));
    }
    {
        Rng srng(Rng::phase_seed(cfg.seed, kShuffle));
        srng.shuffle(alt_services);
    }

    Json services = Json::array();
    for (const auto* list : {&main_services, &alt_services}) {
        for (const auto& s : *list) {
            services.push_back({{"name", s.name}, {"in", s.in}, {"out", s.out}});
            g.events.push_back({{"op", "register_service"}, {"name", s.name}, {"in", s.in}, {"out", s.out}});
        }
    }
    for (auto& e : query_events) g.events.push_back(std::move(e));
    for (const auto& d : g.truth.deletions) g.events.push_back({{"op", "remove_service"}, {"name", d.service}});

    g.instance = Json{{"model", "online"}, {"services", services}, {"queries", queries}};
    Json per_query = Json::object();
    for (const auto& [q, chain] : g.truth.query_chains) {
        g.truth.planted_chain.insert(g.truth.planted_chain.end(), chain.begin(), chain.end());
        per_query[q] = chain;
    }
    g.truth.planted_composition = Json{{"queries", per_query}};
    return g;
}

Generated generate(io::Model model, const GenConfig& cfg) {
    switch (model) {
        case io::Model::name: return generate_name_instance(cfg);
        case io::Model::hierarchical: return generate_hierarchical_instance(cfg);
        case io::Model::relational: return generate_relational_instance(cfg);
        case io::Model::oo: return generate_oo_instance(cfg);
        case io::Model::online: return generate_online_scenario(cfg);
    }
    throw io::InputError("unknown model");
}

}  // namespace wsc::gen

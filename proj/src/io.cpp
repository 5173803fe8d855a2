#include "wsc/io.hpp"

#include <fstream>
#include <sstream>

namespace wsc::io {

namespace {

// Converts loader-level failures into InputError.
template <typename Fn>
auto guarded(std::string_view what, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const InputError&) {
        throw;
    } catch (const Json::exception& e) {
        throw InputError(std::string(what) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string(what) + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

std::vector<std::string> strings(const Json& j) {
    if (!j.is_array()) throw InputError("expected an array of strings");
    return j.get<std::vector<std::string>>();
}

ParamSet intern_all(ParameterRegistry& names, const Json& list) {
    ParamSet out;
    for (const auto& s : strings(list)) out.push_back(names.intern(s));
    return make_param_set(std::move(out));
}

std::vector<ConceptDecl> concept_decls(const Json& list) {
    std::vector<ConceptDecl> out;
    for (const auto& c : list) {
        ConceptDecl d{field(c, "name").get<std::string>(), std::nullopt};
        if (c.contains("parent") && !c.at("parent").is_null()) d.parent = c.at("parent").get<std::string>();
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<InstanceId> instances(const Taxonomy& tax, const Json& list) {
    std::vector<InstanceId> out;
    for (const auto& s : strings(list)) out.push_back(tax.instance_at(s));
    return out;
}

std::vector<RelParamDecl> rel_params(const Json& list) {
    std::vector<RelParamDecl> out;
    for (const auto& p : list) out.push_back({field(p, "name").get<std::string>(), field(p, "type").get<std::string>()});
    return out;
}

std::vector<RelAtomDecl> rel_atoms(const Json& j, const char* key) {
    std::vector<RelAtomDecl> out;
    if (!j.contains(key)) return out;
    for (const auto& a : j.at(key)) {
        if (!a.is_array() || a.size() != 3) throw InputError("relation atoms are [relation, first, second]");
        out.push_back({a[0].get<std::string>(), a[1].get<std::string>(), a[2].get<std::string>()});
    }
    return out;
}

std::vector<PartialConcept> partial_concepts(const ConceptTree& tree, const Json& list) {
    std::vector<PartialConcept> out;
    for (const auto& p : list) {
        PartialConcept pc{tree.taxonomy().concept_at(field(p, "concept").get<std::string>()), {}};
        if (p.contains("props"))
            for (const auto& name : strings(p.at("props"))) pc.props.push_back(tree.property_at(name));
        out.push_back(std::move(pc));
    }
    return out;
}

using Bindings = std::vector<std::pair<std::string, std::string>>;

Bindings bindings_of(const Json& j, const char* key) {
    Bindings out;
    if (!j.contains(key)) return out;
    for (const auto& [k, v] : j.at(key).items()) out.emplace_back(k, v.get<std::string>());
    return out;
}

Json bindings_json(const Bindings& b) {
    Json out = Json::object();
    for (const auto& [k, v] : b) out[k] = v;
    return out;
}

}  // namespace

Model parse_model(std::string_view tag) {
    if (tag == "name") return Model::name;
    if (tag == "hierarchical") return Model::hierarchical;
    if (tag == "relational") return Model::relational;
    if (tag == "oo") return Model::oo;
    if (tag == "online") return Model::online;
    throw InputError("unknown model: " + std::string(tag));
}

std::string_view model_tag(Model m) {
    switch (m) {
        case Model::name: return "name";
        case Model::hierarchical: return "hierarchical";
        case Model::relational: return "relational";
        case Model::oo: return "oo";
        case Model::online: return "online";
    }
    return "name";
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

Model model_of(const Json& instance) {
    return guarded("model", [&] { return parse_model(field(instance, "model").get<std::string>()); });
}

NameProblem parse_name(const Json& j) {
    return guarded("name instance", [&] {
        NameProblem p;
        const Json& q = field(j, "query");
        p.request.init = intern_all(*p.names, field(q, "known"));
        p.request.goal = intern_all(*p.names, field(q, "required"));
        for (const auto& s : field(j, "services")) {
            p.repo.add(Service{field(s, "name").get<std::string>(), intern_all(*p.names, field(s, "in")),
                               intern_all(*p.names, field(s, "out"))});
        }
        return p;
    });
}

HierInstance parse_hierarchical(const Json& j) {
    return guarded("hierarchical instance", [&] {
        const Json& t = field(j, "taxonomy");
        std::vector<InstanceDecl> inst_decls;
        if (t.contains("instances"))
            for (const auto& i : t.at("instances"))
                inst_decls.push_back({field(i, "name").get<std::string>(), field(i, "concept").get<std::string>()});
        HierInstance inst;
        inst.taxonomy = Taxonomy(concept_decls(field(t, "concepts")), inst_decls);
        inst.index = build_euler_index(inst.taxonomy);
        for (const auto& s : field(j, "services")) {
            inst.repo.add(HierService{field(s, "name").get<std::string>(), instances(inst.taxonomy, field(s, "in")),
                                      instances(inst.taxonomy, field(s, "out"))});
        }
        const Json& q = field(j, "query");
        inst.request.init = instances(inst.taxonomy, field(q, "known"));
        inst.request.goal = instances(inst.taxonomy, field(q, "required"));
        return inst;
    });
}

RelInstanceDecl parse_relational_decl(const Json& j) {
    return guarded("relational instance", [&] {
        RelInstanceDecl d;
        d.concepts = concept_decls(field(field(j, "taxonomy"), "concepts"));
        if (j.contains("relations")) {
            for (const auto& r : j.at("relations"))
                d.relations.push_back({field(r, "name").get<std::string>(), r.value("transitive", false),
                                       r.value("symmetric", false)});
        }
        if (j.contains("rules")) {
            for (const auto& r : j.at("rules"))
                d.rules.push_back({field(r, "name").get<std::string>(), strings(field(r, "params")),
                                   rel_atoms(r, "pre"), rel_atoms(r, "eff")});
        }
        for (const auto& s : field(j, "services")) {
            d.services.push_back({field(s, "name").get<std::string>(), rel_params(field(s, "in")),
                                  rel_params(field(s, "out")), rel_atoms(s, "rel")});
        }
        const Json& q = field(j, "query");
        d.query = {rel_params(field(q, "known")), rel_params(field(q, "required")), rel_atoms(q, "rel")};
        return d;
    });
}

RelInstance parse_relational(const Json& j) {
    auto decl = parse_relational_decl(j);
    return guarded("relational instance", [&] { return compile_relational(decl); });
}

OOInstance parse_oo(const Json& j) {
    return guarded("oo instance", [&] {
        std::vector<OOConceptDecl> decls;
        for (const auto& c : field(field(j, "conceptTree"), "concepts")) {
            OOConceptDecl d{field(c, "name").get<std::string>(), std::nullopt, {}};
            if (c.contains("parent") && !c.at("parent").is_null()) d.parent = c.at("parent").get<std::string>();
            if (c.contains("props"))
                for (const auto& p : c.at("props"))
                    d.props.push_back({field(p, "name").get<std::string>(), p.value("type", std::string{})});
            decls.push_back(std::move(d));
        }
        ConceptTree tree(decls);
        std::vector<OOService> services;
        for (const auto& s : field(j, "services")) {
            services.push_back({field(s, "name").get<std::string>(), partial_concepts(tree, field(s, "in")),
                                partial_concepts(tree, field(s, "out"))});
        }
        const Json& q = field(j, "query");
        OOQuery query{partial_concepts(tree, field(q, "known")), partial_concepts(tree, field(q, "required"))};
        return make_oo_instance(std::move(tree), std::move(services), std::move(query));
    });
}

Composition parse_composition(const Json& j) {
    return guarded("composition", [&] {
        Composition c;
        c.calls = strings(field(j, "calls"));
        if (j.contains("layers") && !j.at("layers").is_null())
            c.layers = j.at("layers").get<std::vector<std::vector<std::string>>>();
        return c;
    });
}

Json to_json(const Composition& comp) {
    Json out{{"calls", comp.calls}};
    if (comp.layers) {
        out["layers"] = *comp.layers;
        out["executionPath"] = comp.layers->size();
    }
    return out;
}

RelComposition parse_rel_composition(const Json& j) {
    return guarded("relational composition", [&] {
        RelComposition c;
        for (const auto& step : field(j, "calls")) {
            if (step.contains("service"))
                c.steps.emplace_back(RelCallStep{step.at("service").get<std::string>(), bindings_of(step, "bindings"),
                                                 bindings_of(step, "outputs")});
            else
                c.steps.emplace_back(RelRuleStep{field(step, "rule").get<std::string>(), bindings_of(step, "bindings")});
        }
        c.goal_binding = bindings_of(j, "goalBinding");
        return c;
    });
}

Json to_json(const RelComposition& comp) {
    Json calls = Json::array();
    for (const auto& step : comp.steps) {
        if (const auto* call = std::get_if<RelCallStep>(&step))
            calls.push_back({{"service", call->service},
                             {"bindings", bindings_json(call->bindings)},
                             {"outputs", bindings_json(call->outputs)}});
        else {
            const auto& rule = std::get<RelRuleStep>(step);
            calls.push_back({{"rule", rule.rule}, {"bindings", bindings_json(rule.bindings)}});
        }
    }
    return Json{{"calls", calls},
                {"goalBinding", bindings_json(comp.goal_binding)},
                {"serviceCalls", comp.service_calls()},
                {"ruleApplications", comp.rule_applications()}};
}

Json to_json(const ParamSet& set, const ParameterRegistry& names) {
    Json out = Json::array();
    for (auto p : set) out.push_back(names.name(p));
    return out;
}

}  // namespace wsc::io

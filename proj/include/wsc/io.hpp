#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wsc/core.hpp"
#include "wsc/oo.hpp"
#include "wsc/relational.hpp"
#include "wsc/taxonomy.hpp"

namespace wsc::io {

using Json = nlohmann::json;

// Malformed or inconsistent input; maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Model { name, hierarchical, relational, oo, online };

Model parse_model(std::string_view tag);
std::string_view model_tag(Model m);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
// Reads the "model" tag; throws InputError when missing or unknown.
Model model_of(const Json& instance);

// Name model. The registry interns known, then required, then service parameters.
struct NameProblem {
    std::shared_ptr<ParameterRegistry> names = std::make_shared<ParameterRegistry>();
    Repository repo;
    Request request;
};

NameProblem parse_name(const Json& j);
HierInstance parse_hierarchical(const Json& j);
RelInstanceDecl parse_relational_decl(const Json& j);
RelInstance parse_relational(const Json& j);
OOInstance parse_oo(const Json& j);

Composition parse_composition(const Json& j);
Json to_json(const Composition& comp);

RelComposition parse_rel_composition(const Json& j);
Json to_json(const RelComposition& comp);

Json to_json(const ParamSet& set, const ParameterRegistry& names);

}  // namespace wsc::io

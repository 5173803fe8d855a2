#include "wsc/online_stream.hpp"

#include <string>

namespace wsc {

ParamSet OnlineSession::params(const io::Json& list) {
    if (!list.is_array()) throw io::InputError("expected an array of parameter names");
    ParamSet out;
    for (const auto& p : list) out.push_back(names_.intern(p.get<std::string>()));
    return make_param_set(std::move(out));
}

std::vector<io::Json> OnlineSession::apply(const io::Json& op) {
    if (!op.is_object() || !op.contains("op") || !op.at("op").is_string())
        throw io::InputError("operation lacks an \"op\" field");
    const std::string kind = op.at("op").get<std::string>();
    auto text = [&](const char* key) {
        if (!op.contains(key) || !op.at(key).is_string())
            throw io::InputError(kind + " requires string field \"" + std::string(key) + "\"");
        return op.at(key).get<std::string>();
    };
    auto list = [&](const char* key) -> const io::Json& {
        if (!op.contains(key)) throw io::InputError(kind + " requires field \"" + std::string(key) + "\"");
        return op.at(key);
    };

    std::vector<OnlineEvent> events;
    try {
        if (kind == "register_service") {
            events = state_.register_service(Service{text("name"), params(list("in")), params(list("out"))});
        } else if (kind == "remove_service" || kind == "detect_service_down") {
            events = state_.delete_service(text("name"));
        } else if (kind == "find_composition") {
            events = state_.find_composition(text("id"), OnlineQuery{params(list("known")), params(list("required"))});
        } else if (kind == "drop_request") {
            events = state_.drop_composition_request(text("id"));
        } else {
            throw io::InputError("unknown op: " + kind);
        }
    } catch (const io::InputError&) {
        throw;
    } catch (const io::Json::exception& e) {
        throw io::InputError(kind + ": " + e.what());
    } catch (const std::exception& e) {
        return {io::Json{{"event", "error"}, {"op", kind}, {"message", e.what()}}};
    }
    std::vector<io::Json> out;
    for (const auto& e : events) out.push_back(event_json(e));
    return out;
}

io::Json event_json(const OnlineEvent& e) {
    io::Json j{{"event", e.kind}, {"id", e.id}, {"calls", e.calls}};
    if (!e.service.empty()) j["service"] = e.service;
    if (e.searches) j["searches"] = *e.searches;
    return j;
}

std::vector<io::Json> run_stream(std::istream& in, OnlineSession& session) {
    std::vector<io::Json> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        io::Json op;
        try {
            op = io::Json::parse(line);
        } catch (const io::Json::parse_error& e) {
            throw io::InputError("line " + std::to_string(number) + ": " + e.what());
        }
        for (auto& ev : session.apply(op)) out.push_back(std::move(ev));
    }
    session.finish();
    return out;
}

}  // namespace wsc

#pragma once

#include <istream>
#include <vector>

#include "wsc/io.hpp"
#include "wsc/online.hpp"

namespace wsc {

// Replays JSON-lines operations against one OnlineState.
class OnlineSession {
public:
    explicit OnlineSession(OnlineOptions options = {}) : state_(options) {}

    // Applies one operation; returns its outcome events. Operation-level
    // failures (unknown service, duplicate id, ...) become "error" events.
    // Throws io::InputError when the operation itself is malformed.
    std::vector<io::Json> apply(const io::Json& op);

    // Waits for pending background work.
    void finish() { state_.finish(); }

    OnlineState& state() { return state_; }
    const ParameterRegistry& names() const { return names_; }

private:
    ParamSet params(const io::Json& list);

    ParameterRegistry names_;
    OnlineState state_;
};

io::Json event_json(const OnlineEvent& e);

// Reads every line of `in` (blank lines skipped). Throws io::InputError with
// the line number on malformed JSON.
std::vector<io::Json> run_stream(std::istream& in, OnlineSession& session);

}  // namespace wsc

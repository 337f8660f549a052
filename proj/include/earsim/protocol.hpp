#pragma once

#include <optional>
#include <string>

#include "earsim/engine.hpp"
#include "earsim/messages.hpp"

namespace earsim {

// Newline-delimited JSON wire encoding. One message per line.
std::string encode_line(const CommandMessage& m);
std::string encode_line(const AckMessage& m);
std::string encode_line(const EventMessage& m);

enum class LineType { command, ack, event, invalid };

struct DecodedLine {
    LineType type = LineType::invalid;
    std::optional<CommandMessage> command;
    std::optional<AckMessage> ack;
    std::optional<EventMessage> event;
    std::optional<int64_t> seq_hint; // best-effort seq echo for error acks
    std::string error;               // set when type == invalid
};

// Total: any byte line either decodes or reports invalid, never throws.
DecodedLine decode_line(const std::string& line);

// One cognition connection: decodes lines, validates them, dispatches to the
// engine and produces exactly one ack line per input line.
class ProtocolSession {
public:
    ProtocolSession(Engine& engine, int client_id) : engine_(engine), client_id_(client_id) {}

    // Returns the ack (already newline-terminated) for one wire line.
    std::string process_line(const std::string& line, double at);

    int client_id() const { return client_id_; }

private:
    Engine& engine_;
    int client_id_;
};

} // namespace earsim

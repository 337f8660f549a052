#include "earsim/protocol.hpp"

#include "earsim/error.hpp"

namespace earsim {

std::string encode_line(const CommandMessage& m) { return to_json(m).dump() + "\n"; }
std::string encode_line(const AckMessage& m) { return to_json(m).dump() + "\n"; }
std::string encode_line(const EventMessage& m) { return to_json(m).dump() + "\n"; }

DecodedLine decode_line(const std::string& line) {
    DecodedLine out;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        out.error = "not a JSON object";
        return out;
    }
    if (j.contains("seq") && j.at("seq").is_number_integer())
        out.seq_hint = j.at("seq").get<int64_t>();
    try {
        if (j.contains("cmd")) {
            out.command = command_from_json(j);
            out.type = LineType::command;
        } else if (j.contains("status")) {
            out.ack = ack_from_json(j);
            out.type = LineType::ack;
        } else if (j.contains("kind") && j.contains("event_id")) {
            out.event = event_from_json(j);
            out.type = LineType::event;
        } else {
            out.error = "message has none of cmd/status/kind";
        }
    } catch (const EarError& e) {
        out.type = LineType::invalid;
        out.error = e.what();
    } catch (const nlohmann::json::exception& e) {
        out.type = LineType::invalid;
        out.error = e.what();
    }
    return out;
}

std::string ProtocolSession::process_line(const std::string& line, double at) {
    DecodedLine decoded = decode_line(line);
    if (decoded.type != LineType::command) {
        AckMessage ack;
        ack.seq = decoded.seq_hint.value_or(-1);
        ack.status = "error";
        ack.error_code = to_string(ErrorCode::bad_request);
        ack.payload = nlohmann::json{
            {"message", decoded.error.empty() ? "expected a command" : decoded.error}};
        return encode_line(ack);
    }
    AckMessage ack = engine_.handle_command(client_id_, *decoded.command, at);
    return encode_line(ack);
}

} // namespace earsim

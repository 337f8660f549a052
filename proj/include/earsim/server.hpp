#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "earsim/protocol.hpp"

namespace earsim {

// TCP front door for cognition clients: newline-delimited JSON both ways.
// Reader threads push raw lines into a queue; the owner of the engine
// timeline drains them with pump() between engine steps, which keeps all
// engine access serialized. Events fan out through deliver_event().
class ProtocolServer {
public:
    // host:port; port 0 picks an ephemeral port. Throws EarError(io_error)
    // on bind failure.
    ProtocolServer(Engine& engine, const std::string& host, uint16_t port);
    ~ProtocolServer();

    ProtocolServer(const ProtocolServer&) = delete;
    ProtocolServer& operator=(const ProtocolServer&) = delete;

    void start(); // accept loop
    void stop();

    uint16_t port() const { return port_; }
    std::string endpoint() const;

    // Processes every queued client line (one ack per line, in arrival
    // order per client). Call from the engine-owning thread.
    void pump(double at);

    // SOUND/STREAM_ENDED go to subscribers only, everything else to all.
    void deliver_event(const EventMessage& event);

    int connected_clients() const;

private:
    struct Client {
        int id = 0;
        int fd = -1;
        std::unique_ptr<ProtocolSession> session;
        std::string rx_buffer;
        std::thread reader;
        std::atomic<bool> open{true};
    };

    Engine& engine_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::string host_;
    std::thread accept_thread_;
    std::atomic<bool> running_{false};

    mutable std::mutex clients_mutex_;
    std::map<int, std::shared_ptr<Client>> clients_;
    int next_client_id_ = 1;

    std::mutex lines_mutex_;
    std::vector<std::pair<int, std::string>> pending_lines_;

    void accept_loop();
    void reader_loop(std::shared_ptr<Client> client);
    void send_line(const std::shared_ptr<Client>& client, const std::string& line);
    void close_client(int id);
};

} // namespace earsim

#include "earsim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "earsim/error.hpp"

namespace earsim {

ProtocolServer::ProtocolServer(Engine& engine, const std::string& host, uint16_t port)
    : engine_(engine), host_(host) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw EarError(ErrorCode::io_error, "socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw EarError(ErrorCode::io_error, "bad listen address: " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listen_fd_);
        throw EarError(ErrorCode::io_error, "bind failed on " + host + ":" + std::to_string(port));
    }
    if (::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        throw EarError(ErrorCode::io_error, "listen failed");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

ProtocolServer::~ProtocolServer() { stop(); }

std::string ProtocolServer::endpoint() const { return host_ + ":" + std::to_string(port_); }

void ProtocolServer::start() {
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void ProtocolServer::stop() {
    if (!running_.exchange(false)) {
        if (listen_fd_ >= 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
        }
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (accept_thread_.joinable()) accept_thread_.join();

    std::vector<std::shared_ptr<Client>> clients;
    {
        std::lock_guard<std::mutex> lock(clients_mutex_);
        for (auto& [id, c] : clients_) clients.push_back(c);
        clients_.clear();
    }
    for (auto& c : clients) {
        c->open = false;
        ::shutdown(c->fd, SHUT_RDWR);
        ::close(c->fd);
        if (c->reader.joinable()) c->reader.join();
    }
}

void ProtocolServer::accept_loop() {
    while (running_) {
        sockaddr_in peer{};
        socklen_t len = sizeof(peer);
        int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len);
        if (fd < 0) {
            if (!running_) break;
            continue;
        }
        auto client = std::make_shared<Client>();
        client->fd = fd;
        {
            std::lock_guard<std::mutex> lock(clients_mutex_);
            client->id = next_client_id_++;
            client->session = std::make_unique<ProtocolSession>(engine_, client->id);
            clients_[client->id] = client;
        }
        client->reader = std::thread([this, client] { reader_loop(client); });
    }
}

void ProtocolServer::reader_loop(std::shared_ptr<Client> client) {
    char buf[4096];
    while (client->open) {
        const ssize_t n = ::recv(client->fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        client->rx_buffer.append(buf, static_cast<size_t>(n));
        size_t pos;
        while ((pos = client->rx_buffer.find('\n')) != std::string::npos) {
            std::string line = client->rx_buffer.substr(0, pos);
            client->rx_buffer.erase(0, pos + 1);
            if (line.empty()) continue;
            std::lock_guard<std::mutex> lock(lines_mutex_);
            pending_lines_.emplace_back(client->id, std::move(line));
        }
    }
    client->open = false;
}

void ProtocolServer::pump(double at) {
    std::vector<std::pair<int, std::string>> lines;
    {
        std::lock_guard<std::mutex> lock(lines_mutex_);
        lines.swap(pending_lines_);
    }
    for (auto& [client_id, line] : lines) {
        std::shared_ptr<Client> client;
        {
            std::lock_guard<std::mutex> lock(clients_mutex_);
            auto it = clients_.find(client_id);
            if (it != clients_.end()) client = it->second;
        }
        if (!client) continue; // disconnected before the ack; nothing to send
        const std::string ack = client->session->process_line(line, at);
        send_line(client, ack);
    }

    // reap closed connections so subscriptions do not linger
    std::vector<int> dead;
    {
        std::lock_guard<std::mutex> lock(clients_mutex_);
        for (auto& [id, c] : clients_)
            if (!c->open) dead.push_back(id);
    }
    for (int id : dead) close_client(id);
}

void ProtocolServer::deliver_event(const EventMessage& event) {
    const bool feed_only =
        event.kind == EventKind::SOUND || event.kind == EventKind::STREAM_ENDED;
    std::vector<std::shared_ptr<Client>> targets;
    {
        std::lock_guard<std::mutex> lock(clients_mutex_);
        for (auto& [id, c] : clients_) {
            if (!c->open) continue;
            if (feed_only && !engine_.client_subscribed(id)) continue;
            targets.push_back(c);
        }
    }
    if (targets.empty()) return;
    const std::string line = encode_line(event);
    for (auto& c : targets) send_line(c, line);
}

void ProtocolServer::send_line(const std::shared_ptr<Client>& client, const std::string& line) {
    if (!client->open) return;
    size_t sent = 0;
    while (sent < line.size()) {
        const ssize_t n =
            ::send(client->fd, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            client->open = false;
            return;
        }
        sent += static_cast<size_t>(n);
    }
}

void ProtocolServer::close_client(int id) {
    std::shared_ptr<Client> client;
    {
        std::lock_guard<std::mutex> lock(clients_mutex_);
        auto it = clients_.find(id);
        if (it == clients_.end()) return;
        client = it->second;
        clients_.erase(it);
    }
    client->open = false;
    ::shutdown(client->fd, SHUT_RDWR);
    ::close(client->fd);
    if (client->reader.joinable()) client->reader.join();
    engine_.drop_client(id);
}

int ProtocolServer::connected_clients() const {
    std::lock_guard<std::mutex> lock(clients_mutex_);
    return static_cast<int>(clients_.size());
}

} // namespace earsim

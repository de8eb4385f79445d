#include "deixis/gateway.hpp"

#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace deixis {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket&& socket, SessionManager& manager, std::size_t queue_capacity)
        : ws_(std::move(socket)), manager_(manager), queue_(queue_capacity) {}

    ~Connection() {
        for (const auto& id : owned_) manager_.close_session(id);
    }

    void start() {
        net::dispatch(ws_.get_executor(), [self = shared_from_this()] {
            self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
            self->ws_.async_accept([self](beast::error_code ec) {
                if (!ec) self->read();
            });
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec) {
        if (ec) return;
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        for (const auto& e : manager_.handle_text(text, &owned_)) queue_.push(e);
        if (queue_.dropped() > reported_drops_) {
            spdlog::warn("gateway: {} trajectory frames dropped on a slow connection", queue_.dropped() - reported_drops_);
            reported_drops_ = queue_.dropped();
        }
        write();
        read();
    }

    void write() {
        if (writing_) return;
        auto next = queue_.pop();
        if (!next) return;
        writing_ = true;
        current_ = std::move(*next);
        ws_.text(true);
        ws_.async_write(net::buffer(current_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            if (!ec) self->write();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    SessionManager& manager_;
    OutboundQueue queue_;
    std::set<std::string> owned_;
    std::string current_;
    bool writing_ = false;
    std::size_t reported_drops_ = 0;
};

}  // namespace

struct GatewayServer::Impl {
    Impl(Config c, ChatClient* llm) : config(std::move(c)), manager(config, llm), acceptor(net::make_strand(ioc)) {}

    unsigned short bind() {
        const tcp::endpoint ep(net::ip::make_address(config.gateway.host), config.gateway.port);
        acceptor.open(ep.protocol());
        acceptor.set_option(net::socket_base::reuse_address(true));
        acceptor.bind(ep);
        acceptor.listen(net::socket_base::max_listen_connections);
        return acceptor.local_endpoint().port();
    }

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<Connection>(std::move(socket), manager, config.gateway.outbound_queue)->start();
            accept();
        });
    }

    Config config;
    SessionManager manager;
    net::io_context ioc;
    tcp::acceptor acceptor;
    std::vector<std::thread> threads;
};

GatewayServer::GatewayServer(Config config, ChatClient* llm) : impl_(std::make_unique<Impl>(std::move(config), llm)) {}

GatewayServer::~GatewayServer() { stop(); }

SessionManager& GatewayServer::sessions() { return impl_->manager; }

unsigned short GatewayServer::start() {
    const unsigned short port = impl_->bind();
    impl_->accept();
    const unsigned n = std::max(2u, std::thread::hardware_concurrency());
    for (unsigned k = 0; k < n; ++k) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
    return port;
}

void GatewayServer::run() {
    const unsigned short port = impl_->bind();
    impl_->accept();
    net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
    signals.async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
    spdlog::info("gateway listening on {}:{}", impl_->config.gateway.host, port);
    impl_->ioc.run();
}

void GatewayServer::stop() {
    impl_->ioc.stop();
    for (auto& t : impl_->threads) {
        if (t.joinable()) t.join();
    }
    impl_->threads.clear();
}

int serve(const Config& config) {
    GatewayServer server(config);
    server.run();
    return 0;
}

}  // namespace deixis

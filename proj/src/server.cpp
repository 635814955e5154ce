#include "remi/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <system_error>
#include <thread>

namespace remi {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {
// A client this far behind is dropped rather than buffered without bound.
constexpr std::size_t max_queued_frames = 16384;
} // namespace

class Connection;

struct WebSocketServer::Impl {
    explicit Impl(const EngineConfig& config, const ServerOptions& opts)
        : options(opts), loop(config, [this](const Delivery& d) { route(d); }) {}

    void route(const Delivery& d);
    void accept();

    ServerOptions options;
    net::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::optional<net::signal_set> signals;
    ServiceLoop loop;
    std::map<ClientId, std::weak_ptr<Connection>> connections; // io thread only
    std::thread io_thread;
    std::mutex mutex;
    std::condition_variable released;
    bool release = false;
    bool started = false;
    std::uint16_t bound_port = 0;
};

class Connection : public std::enable_shared_from_this<Connection> {
  public:
    Connection(tcp::socket socket, WebSocketServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(std::string text) {
        if (id_ == 0)
            return;
        if (queue_.size() >= max_queued_frames) {
            spdlog::warn("client {} is not reading; closing", id_);
            close();
            return;
        }
        queue_.push_back(std::move(text));
        if (queue_.size() == 1)
            write_next();
    }

    void close() {
        if (id_ == 0)
            return;
        server_.loop.disconnect(id_);
        server_.connections.erase(id_);
        spdlog::info("client {} disconnected", id_);
        id_ = 0;
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().close(ignored);
    }

  private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            spdlog::debug("websocket handshake failed: {}", ec.message());
            return;
        }
        id_ = server_.loop.connect();
        server_.connections[id_] = weak_from_this();
        spdlog::info("client {} connected", id_);
        read_next();
    }

    void read_next() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            close();
            return;
        }
        if (id_ == 0)
            return;
        server_.loop.post(id_, beast::buffers_to_string(buffer_.data()));
        buffer_.consume(buffer_.size());
        read_next();
    }

    void write_next() {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
    }

    void on_write(beast::error_code ec) {
        if (ec) {
            close();
            return;
        }
        if (!queue_.empty())
            queue_.pop_front();
        if (!queue_.empty() && id_ != 0)
            write_next();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    WebSocketServer::Impl& server_;
    ClientId id_ = 0;
};

void WebSocketServer::Impl::route(const Delivery& d) {
    // Called on the engine loop thread; hop to the I/O thread.
    net::post(ioc, [this, d] {
        auto it = connections.find(d.client);
        if (it == connections.end())
            return;
        if (auto conn = it->second.lock())
            conn->send(d.text);
    });
}

void WebSocketServer::Impl::accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec)
            return; // acceptor closed
        std::make_shared<Connection>(std::move(socket), *this)->run();
        accept();
    });
}

WebSocketServer::WebSocketServer(const EngineConfig& config, const ServerOptions& options)
    : impl_(std::make_unique<Impl>(config, options)) {}

WebSocketServer::~WebSocketServer() { stop(); }

void WebSocketServer::start() {
    auto& s = *impl_;
    if (s.started)
        return;
    beast::error_code ec;
    auto check = [&ec](const char* what) {
        if (ec)
            throw std::system_error(std::error_code(ec.value(), std::system_category()), what);
    };
    const auto address = net::ip::make_address(s.options.address, ec);
    check("address");
    const tcp::endpoint endpoint(address, s.options.port);
    s.acceptor.open(endpoint.protocol(), ec);
    check("open");
    s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    check("set_option");
    s.acceptor.bind(endpoint, ec);
    check("bind");
    s.acceptor.listen(net::socket_base::max_listen_connections, ec);
    check("listen");
    s.bound_port = s.acceptor.local_endpoint().port();

    if (s.options.handle_signals) {
        s.signals.emplace(s.ioc, SIGINT, SIGTERM);
        s.signals->async_wait([&s](beast::error_code ec, int) {
            if (ec)
                return;
            std::lock_guard lock(s.mutex);
            s.release = true;
            s.released.notify_all();
        });
    }

    s.loop.start();
    s.accept();
    s.io_thread = std::thread([&s] { s.ioc.run(); });
    s.started = true;
    spdlog::info("listening on ws://{}:{}", s.options.address, s.bound_port);
}

void WebSocketServer::stop() {
    auto& s = *impl_;
    if (!s.started)
        return;
    s.loop.stop();
    net::post(s.ioc, [&s] {
        beast::error_code ignored;
        s.acceptor.close(ignored);
        if (s.signals)
            s.signals->cancel();
        auto conns = s.connections;
        for (auto& [id, weak] : conns)
            if (auto c = weak.lock())
                c->close();
    });
    // Let the close handlers drain, then stop.
    net::post(s.ioc, [&s] { s.ioc.stop(); });
    if (s.io_thread.joinable())
        s.io_thread.join();
    s.started = false;
    std::lock_guard lock(s.mutex);
    s.release = true;
    s.released.notify_all();
}

void WebSocketServer::wait() {
    std::unique_lock lock(impl_->mutex);
    impl_->released.wait(lock, [this] { return impl_->release; });
}

std::uint16_t WebSocketServer::port() const { return impl_->bound_port; }

SessionLog WebSocketServer::session_log() { return impl_->loop.session_log(); }

} // namespace remi

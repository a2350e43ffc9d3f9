#include <deque>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "facesketch/service.hpp"

namespace fsk {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kBodyLimit = 64u << 20;

class EventSession : public std::enable_shared_from_this<EventSession> {
public:
    EventSession(tcp::socket&& socket, Api& api, std::string session_id)
        : ws_(std::move(socket)), api_(api), session_id_(std::move(session_id))
    {
    }

    ~EventSession()
    {
        if (subscription_) api_.unsubscribe(subscription_);
    }

    void run(http::request<http::string_body> req)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&EventSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec)
    {
        if (ec) return;
        std::weak_ptr<EventSession> weak = shared_from_this();
        subscription_ = api_.subscribe(session_id_, [weak](const std::string& text) {
            if (auto self = weak.lock())
                net::post(self->ws_.get_executor(), [self, text] { self->enqueue(text); });
        });
        if (!subscription_) {
            ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
            return;
        }
        enqueue(Json{{"type", "status"}, {"status", "subscribed"}}.dump());
        do_read();
    }

    // Incoming frames are ignored; the read loop notices the close.
    void do_read()
    {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                if (self->subscription_) self->api_.unsubscribe(self->subscription_);
                self->subscription_ = 0;
                return;
            }
            self->buffer_.consume(self->buffer_.size());
            self->do_read();
        });
    }

    void enqueue(std::string text)
    {
        queue_.push_back(std::move(text));
        if (queue_.size() == 1) do_write();
    }

    void do_write()
    {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->do_write();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    Api& api_;
    std::string session_id_;
    std::uint64_t subscription_ = 0;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Api& api, net::thread_pool& workers)
        : stream_(std::move(socket)), api_(api), workers_(workers)
    {
    }

    void run()
    {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
    }

private:
    void do_read()
    {
        parser_.emplace();
        parser_->body_limit(kBodyLimit);
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec == http::error::end_of_stream) return close();
        if (ec) return;
        http::request<http::string_body> req = parser_->release();

        if (websocket::is_upgrade(req)) {
            const auto [path, query] = split_target(std::string(req.target()));
            const std::string prefix = "/sessions/", suffix = "/events";
            if (path.size() > prefix.size() + suffix.size() && path.rfind(prefix, 0) == 0 &&
                path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
                const std::string id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
                const ApiResponse status = api_.handle({"GET", "/sessions/" + id, "", ""});
                if (status.status == 200) {
                    stream_.expires_never();
                    std::make_shared<EventSession>(stream_.release_socket(), api_, id)->run(std::move(req));
                    return;
                }
            }
            return respond(req.version(), false, {404, "application/json", R"({"error":"no such event channel"})"});
        }

        ApiRequest request{std::string(req.method_string()), std::string(req.target()), std::move(req.body()),
                           std::string(req[http::field::accept])};
        const unsigned version = req.version();
        const bool keep_alive = req.keep_alive();
        net::post(workers_, [self = shared_from_this(), request = std::move(request), version, keep_alive]() mutable {
            ApiResponse response = self->api_.handle(request);
            net::post(self->stream_.get_executor(), [self, version, keep_alive, response = std::move(response)]() mutable {
                self->respond(version, keep_alive, std::move(response));
            });
        });
    }

    void respond(unsigned version, bool keep_alive, ApiResponse r)
    {
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status), version);
        res->set(http::field::server, "facesketch");
        res->set(http::field::content_type, r.content_type);
        res->set(http::field::access_control_allow_origin, "*");
        res->keep_alive(keep_alive);
        res->body() = std::move(r.body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (!res->keep_alive()) return self->close();
            self->do_read();
        });
    }

    void close()
    {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    Api& api_;
    net::thread_pool& workers_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
};

}  // namespace

struct Server::Impl {
    net::io_context ioc;
    tcp::acceptor acceptor{net::make_strand(ioc)};
    net::thread_pool workers;
    std::vector<std::thread> threads;
    Api& api;

    Impl(Api& a, int worker_threads) : workers(static_cast<std::size_t>(std::max(1, worker_threads))), api(a) {}

    void do_accept()
    {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec == net::error::operation_aborted) return;
            if (!ec) std::make_shared<HttpSession>(std::move(socket), api, workers)->run();
            do_accept();
        });
    }
};

Server::Server(ServiceOptions options) : options_(std::move(options)), api_(std::make_unique<Api>(options_)) {}

Server::~Server() { stop(); }

unsigned short Server::start()
{
    if (impl_) return port_;
    impl_ = std::make_unique<Impl>(*api_, options_.worker_threads);
    const tcp::endpoint endpoint{net::ip::make_address(options_.address), options_.port};
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(net::socket_base::max_listen_connections);
    port_ = impl_->acceptor.local_endpoint().port();
    impl_->do_accept();
    for (int k = 0; k < std::max(1, options_.io_threads); ++k) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
    return port_;
}

void Server::stop()
{
    if (!impl_) return;
    // Handlers posted back by workers after this point land in a stopped
    // context and are destroyed with it.
    impl_->ioc.stop();
    for (std::thread& t : impl_->threads) t.join();
    impl_->workers.join();
    impl_.reset();
}

}  // namespace fsk

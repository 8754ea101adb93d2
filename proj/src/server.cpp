#include "ioda/server.hpp"

#include <algorithm>
#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "ioda/error.hpp"

namespace ioda {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response json_response(const Request& req, http::status status, const Json& body) {
  Response res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

std::string query_param(const std::string& target, const std::string& name) {
  std::size_t pos = target.find('?');
  while (pos != std::string::npos) {
    const std::size_t begin = pos + 1;
    const std::size_t end = std::min(target.find('&', begin), target.size());
    const std::size_t eq = target.find('=', begin);
    if (eq < end && target.compare(begin, eq - begin, name) == 0) return target.substr(eq + 1, end - eq - 1);
    pos = end < target.size() ? end : std::string::npos;
  }
  return {};
}

std::string_view path_of(std::string_view target) { return target.substr(0, target.find('?')); }

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<Session> session, SessionRegistry& registry)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        session_(std::move(session)),
        registry_(registry) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    send(session_->current_frame().dump());
    do_read();
    schedule_tick();
  }

  void schedule_tick() {
    if (ticking_ || closing_) return;
    ticking_ = true;
    const auto period = std::chrono::duration<double>(1.0 / session_->config().session.tick_hz);
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(period));
    timer_.async_wait(beast::bind_front_handler(&WsConnection::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    ticking_ = false;
    if (ec || closing_) return;
    try {
      const bool was_done = session_->done();
      for (const auto& frame : session_->tick()) send(frame.dump());
      if (was_done || session_->done()) return;  // idle until a reset arrives
    } catch (const Error& e) {
      send(error_frame(e.what()).dump());
      return;
    }
    schedule_tick();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closing_ = true;
      timer_.cancel();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    Json msg;
    try {
      msg = Json::parse(text);
    } catch (const Json::exception& e) {
      send(error_frame(std::string("malformed message: ") + e.what()).dump());
      do_read();
      return;
    }
    if (auto err = session_->receive(msg)) send(err->dump());
    if (session_->closed()) {
      registry_.close(session_->id());
      closing_ = true;
      timer_.cancel();
      close_after_writes_ = true;
      if (queue_.empty()) do_close();
      return;
    }
    if (msg.is_object() && msg.value("type", "") == "reset") send(session_->current_frame().dump());
    if (!session_->done()) schedule_tick();
    do_read();
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closing_ = true;
      timer_.cancel();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    } else if (close_after_writes_) {
      do_close();
    }
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  std::shared_ptr<Session> session_;
  SessionRegistry& registry_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool ticking_ = false;
  bool closing_ = false;
  bool close_after_writes_ = false;
};

}  // namespace

struct TeleopServer::Impl {
  explicit Impl(ServerOptions opts) : options(std::move(opts)), acceptor(ioc) {}

  Response handle(const Request& req) {
    const std::string target(req.target());
    const std::string_view path = path_of(target);
    try {
      if (path == "/api/scenarios" && req.method() == http::verb::get) {
        Json list = Json::array();
        for (const auto& name : builtin_scenario_names()) {
          const auto c = builtin_scenario(name);
          Json j;
          j["name"] = name;
          j["variant"] = std::string(to_string(c.env.variant));
          j["policy"] = std::string(to_string(c.policy.kind));
          j["ioda"] = c.ioda_enabled;
          list.push_back(j);
        }
        Json body;
        body["scenarios"] = list;
        return json_response(req, http::status::ok, body);
      }
      if (path == "/api/sessions" && req.method() == http::verb::get) {
        Json body;
        body["sessions"] = registry.ids();
        return json_response(req, http::status::ok, body);
      }
      if (path == "/api/sessions" && req.method() == http::verb::post) {
        ScenarioConfig config = options.base;
        if (const auto name = query_param(target, "scenario"); !name.empty()) {
          config = builtin_scenario(name);
          config.output_dir = options.base.output_dir;
          config.seed = options.base.seed;
          config.session = options.base.session;
        }
        apply_config_text(config, req.body());
        auto session = registry.create(config);
        Json body;
        body["session"] = session->id();
        body["frame"] = session->current_frame();
        return json_response(req, http::status::created, body);
      }
      if (req.method() == http::verb::get) return serve_static(req, path);
      return json_response(req, http::status::method_not_allowed, error_frame("method not allowed"));
    } catch (const Error& e) {
      return json_response(req, http::status::bad_request, error_frame(e.what()));
    }
  }

  Response serve_static(const Request& req, std::string_view path) {
    if (options.static_dir.empty() || path.find("..") != std::string_view::npos) {
      return json_response(req, http::status::not_found, error_frame("not found"));
    }
    std::filesystem::path file = options.static_dir / std::string(path.substr(1));
    if (path == "/") file = options.static_dir / "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in || std::filesystem::is_directory(file)) {
      return json_response(req, http::status::not_found, error_frame("not found"));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Response res{http::status::ok, req.version()};
    res.set(http::field::content_type, std::string(mime_type(file)));
    res.keep_alive(req.keep_alive());
    res.body() = buf.str();
    res.prepare_payload();
    return res;
  }

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(std::move(socket), *this)->run();
      do_accept();
    });
  }

  class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
   public:
    HttpConnection(tcp::socket&& socket, Impl& impl) : stream_(std::move(socket)), impl_(impl) {}

    void run() {
      net::dispatch(stream_.get_executor(),
                    beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
    }

   private:
    void do_read() {
      req_ = {};
      stream_.expires_after(std::chrono::seconds(30));
      http::async_read(stream_, buffer_, req_,
                       beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(req_)) {
        const std::string target(req_.target());
        const std::string_view path = path_of(target);
        constexpr std::string_view prefix = "/ws/";
        std::shared_ptr<Session> session;
        if (path.substr(0, prefix.size()) == prefix) {
          session = impl_.registry.find(std::string(path.substr(prefix.size())));
        }
        if (session) {
          stream_.expires_never();
          std::make_shared<WsConnection>(stream_.release_socket(), std::move(session), impl_.registry)
              ->run(std::move(req_));
          return;
        }
        res_ = json_response(req_, http::status::not_found, error_frame("session not found"));
      } else {
        res_ = impl_.handle(req_);
      }
      http::async_write(stream_, res_, beast::bind_front_handler(&HttpConnection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res_.keep_alive()) {
        do_read();
      } else {
        beast::error_code ignored;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    }

    beast::tcp_stream stream_;
    Impl& impl_;
    beast::flat_buffer buffer_;
    Request req_;
    Response res_;
  };

  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  SessionRegistry registry;
  std::vector<std::thread> threads;
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopped = false;
};

TeleopServer::TeleopServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

TeleopServer::~TeleopServer() { stop(); }

unsigned short TeleopServer::start() {
  auto& im = *impl_;
  beast::error_code ec;
  const tcp::endpoint endpoint{net::ip::make_address(im.options.address, ec), im.options.port};
  if (ec) throw Error(ErrorCategory::kConfig, "bad listen address '" + im.options.address + "'");
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCategory::kIo, "cannot listen on " + im.options.address + ": " + ec.message());
  im.do_accept();
  for (int i = 0; i < std::max(1, im.options.threads); ++i) {
    im.threads.emplace_back([&im] { im.ioc.run(); });
  }
  return im.acceptor.local_endpoint().port();
}

void TeleopServer::stop() {
  auto& im = *impl_;
  im.ioc.stop();
  for (auto& t : im.threads) {
    if (t.joinable()) t.join();
  }
  im.threads.clear();
  {
    std::lock_guard lock(im.stop_mutex);
    im.stopped = true;
  }
  im.stop_cv.notify_all();
}

void TeleopServer::wait() {
  auto& im = *impl_;
  std::unique_lock lock(im.stop_mutex);
  im.stop_cv.wait(lock, [&] { return im.stopped; });
}

SessionRegistry& TeleopServer::registry() { return impl_->registry; }

}  // namespace ioda

#include "tapestry/monitor/monitor.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "tapestry/io/output.hpp"
#include "tapestry/unigrid/reduction.hpp"

namespace tapestry::monitor {

using nlohmann::json;

flesh::ThornManifest http_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "http";
  m.parameters = {
      bool_param("http::enabled", false, false, "serve the monitoring interface"),
      int_param("http::port", 8080, std::pair{0.0, 65535.0}, false, "port (0: any free port)"),
      string_param("http::host", "127.0.0.1", false, "address to bind"),
      string_param("http::norms", "", false, "comma-separated variables whose norms are published"),
  };
  return m;
}

namespace {

Response json_response(int status, const json& j) { return {status, j.dump()}; }
Response error(int status, const std::string& msg) { return json_response(status, {{"error", msg}}); }

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size()) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  while (!q.empty()) {
    const auto amp = q.find('&');
    const auto pair = q.substr(0, amp);
    const auto eq = pair.find('=');
    if (eq == std::string_view::npos)
      out[url_decode(pair)] = "";
    else
      out[url_decode(pair.substr(0, eq))] = url_decode(pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    q.remove_prefix(amp + 1);
  }
  return out;
}

json param_value_json(const flesh::ParamValue& v) { return io::to_json(v); }

}  // namespace

struct Monitor::State {
  enum class Kind { steer, pause, resume, checkpoint, terminate, reduce };
  struct Action {
    Kind kind;
    std::string name;
    flesh::ParamValue value;
    std::optional<std::int64_t> at;
    std::string op;
    std::shared_ptr<std::promise<Response>> reply;
  };

  MonitorOptions options;
  std::map<std::string, flesh::ParameterSpec, std::less<>> specs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  mutable std::mutex mutex;
  std::condition_variable cv;
  std::deque<Action> queue;
  std::string status = "{}";
  std::string timers = "[]";
  std::string params = "{}";
  json steering = json::array();
  json events = json::array();
  std::int64_t published = 0;
  std::int64_t last_iteration = 0;
  bool paused = false;
  bool closed = false;

  std::unique_ptr<httplib::Server> server;
  std::thread server_thread;

  double uptime() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }

  void event(std::int64_t iteration, json e) {
    e["iteration"] = iteration;
    std::lock_guard lock(mutex);
    e["seq"] = events.size();
    events.push_back(std::move(e));
  }

  void publish(flesh::Simulation& sim, bool is_paused) {
    json s;
    s["iteration"] = sim.iteration();
    s["time"] = sim.time();
    s["active_bin"] = flesh::to_string(sim.active_bin());
    s["nranks"] = sim.driver().nranks();
    json norms = json::object();
    try {
      for (const auto& v : options.norms) norms[v] = sim.driver().reduce("l2", v);
    } catch (const std::exception&) {
      // nothing allocated yet
    }
    s["norms"] = norms;
    s["uptime"] = uptime();
    s["state"] = sim.termination_requested() ? "terminating" : is_paused ? "paused" : "running";

    json t = json::array();
    for (const auto& e : sim.timer_report()) t.push_back({{"name", e.name}, {"seconds", e.seconds}, {"calls", e.calls}});

    json p = json::object();
    for (const auto& [name, spec] : sim.params().specs()) {
      json entry = {{"value", param_value_json(sim.params().get(name))},
                    {"kind", flesh::to_string(spec.kind)},
                    {"steerable", spec.steerable},
                    {"description", spec.description}};
      if (spec.range) entry["range"] = {spec.range->first, spec.range->second};
      if (!spec.allowed.empty()) {
        entry["allowed"] = json::array();
        for (const auto& a : spec.allowed) entry["allowed"].push_back(param_value_json(a));
      }
      p[name] = entry;
    }

    json log = json::array();
    for (const auto& e : sim.steering_log())
      log.push_back({{"iteration", e.iteration}, {"name", e.name}, {"old", e.old_value}, {"new", e.new_value}});

    auto text = s.dump();
    std::lock_guard lock(mutex);
    status = std::move(text);
    timers = t.dump();
    params = p.dump();
    last_iteration = sim.iteration();
    steering = std::move(log);
    ++published;
  }

  std::deque<Action> take() {
    std::lock_guard lock(mutex);
    return std::exchange(queue, {});
  }

  void run(flesh::Simulation& sim, Action& a) {
    const auto it = sim.iteration();
    switch (a.kind) {
      case Kind::steer:
        try {
          const auto ack = sim.set_parameter(a.name, a.value, a.at);
          event(it, {{"kind", "steer"},
                     {"name", a.name},
                     {"value", param_value_json(a.value)},
                     {"effective_iteration", ack.effective_iteration},
                     {"no_op", ack.no_op}});
        } catch (const std::exception& e) {
          event(it, {{"kind", "rejected"}, {"name", a.name}, {"reason", e.what()}});
        }
        break;
      case Kind::pause: {
        std::lock_guard lock(mutex);
        paused = true;
      }
        event(it, {{"kind", "pause"}});
        break;
      case Kind::resume: {
        std::lock_guard lock(mutex);
        paused = false;
      }
        event(it, {{"kind", "resume"}});
        break;
      case Kind::terminate: {
        std::lock_guard lock(mutex);
        paused = false;
      }
        sim.request_termination();
        event(it, {{"kind", "terminate"}});
        break;
      case Kind::checkpoint:
        try {
          const auto dir = std::filesystem::path(options.checkpoint_dir) / ("it_" + std::to_string(it));
          io::checkpoint_write(sim, dir);
          event(it, {{"kind", "checkpoint"}, {"path", dir.string()}});
        } catch (const std::exception& e) {
          event(it, {{"kind", "checkpoint_failed"}, {"reason", e.what()}});
        }
        break;
      case Kind::reduce:
        try {
          const double v = sim.driver().reduce(a.op, a.name);
          a.reply->set_value(json_response(200, {{"var", a.name}, {"op", a.op}, {"iteration", it}, {"value", v}}));
        } catch (const std::out_of_range& e) {
          a.reply->set_value(error(404, e.what()));
        } catch (const std::exception& e) {
          a.reply->set_value(error(400, e.what()));
        }
        break;
    }
  }

  void on_boundary(flesh::Simulation& sim) {
    auto drain = [&] {
      for (auto& a : take()) run(sim, a);
    };
    {
      std::lock_guard lock(mutex);
      if (closed) return;
    }
    drain();
    bool is_paused;
    {
      std::lock_guard lock(mutex);
      is_paused = paused;
    }
    publish(sim, is_paused);
    while (is_paused) {
      {
        std::unique_lock lock(mutex);
        cv.wait_for(lock, std::chrono::milliseconds(100), [&] { return !queue.empty() || closed; });
        if (closed) return;
      }
      drain();
      {
        std::lock_guard lock(mutex);
        is_paused = paused;
      }
      publish(sim, is_paused);
    }
  }

  void enqueue(Action a) {
    {
      std::lock_guard lock(mutex);
      queue.push_back(std::move(a));
    }
    cv.notify_all();
  }

  Response reject(int status, const std::string& name, const std::string& reason) {
    std::int64_t it;
    {
      std::lock_guard lock(mutex);
      it = last_iteration;
    }
    event(it, {{"kind", "rejected"}, {"name", name}, {"reason", reason}});
    return error(status, reason);
  }

  Response post_params(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string() || !j.contains("value"))
      return error(400, "expected {\"name\": ..., \"value\": ...}");
    const auto name = j["name"].get<std::string>();
    const auto it = specs.find(name);
    if (it == specs.end()) return reject(404, name, "unknown parameter " + name);
    const auto& spec = it->second;
    if (!spec.steerable) return reject(403, name, "parameter " + name + " is not steerable while the simulation runs");
    flesh::ParamValue v;
    try {
      const auto& jv = j["value"];
      if (jv.is_string() && spec.kind != flesh::ParamKind::string && spec.kind != flesh::ParamKind::keyword)
        v = spec.parse(jv.get<std::string>());
      else if (spec.kind == flesh::ParamKind::real && jv.is_number())
        v = jv.get<double>();
      else
        v = io::param_from_json(spec, jv);
      spec.check(v);
    } catch (const std::exception& e) {
      return reject(400, name, std::string("bad value for ") + name + ": " + e.what());
    }
    Action a{Kind::steer, name, v, std::nullopt, {}, nullptr};
    if (j.contains("at_iteration")) {
      if (!j["at_iteration"].is_number_integer()) return error(400, "at_iteration must be an integer");
      a.at = j["at_iteration"].get<std::int64_t>();
    }
    enqueue(std::move(a));
    return json_response(202, {{"queued", true}, {"name", name}, {"value", param_value_json(v)}});
  }

  Response post_control(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string())
      return error(400, "expected {\"action\": pause|resume|checkpoint|terminate}");
    const auto action = j["action"].get<std::string>();
    Kind k;
    if (action == "pause")
      k = Kind::pause;
    else if (action == "resume")
      k = Kind::resume;
    else if (action == "checkpoint")
      k = Kind::checkpoint;
    else if (action == "terminate")
      k = Kind::terminate;
    else
      return error(400, "unknown action " + action);
    enqueue({k, {}, {}, std::nullopt, {}, nullptr});
    return json_response(202, {{"queued", action}});
  }

  Response get_reduce(const std::map<std::string, std::string>& query) {
    const auto var = query.find("var");
    if (var == query.end() || var->second.empty()) return error(400, "missing var");
    const auto op = query.count("op") ? query.at("op") : std::string("l2");
    try {
      unigrid::parse_reduce_op(op);
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
    auto reply = std::make_shared<std::promise<Response>>();
    auto fut = reply->get_future();
    enqueue({Kind::reduce, var->second, {}, std::nullopt, op, reply});
    if (fut.wait_for(std::chrono::duration<double>(options.reduce_timeout)) != std::future_status::ready)
      return error(503, "no iteration boundary reached in time");
    return fut.get();
  }

  Response handle(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                  const std::string& body) {
    if (method == "GET") {
      std::lock_guard lock(mutex);
      if (path == "/status") return {200, status};
      if (path == "/timers") return {200, timers};
      if (path == "/params") return {200, params};
      if (path == "/log") return json_response(200, {{"events", events}, {"steering", steering}});
    }
    if (method == "GET" && path == "/reduce") return get_reduce(query);
    if (method == "POST" && path == "/params") return post_params(body);
    if (method == "POST" && path == "/control") return post_control(body);
    return error(404, "no endpoint " + method + " " + path);
  }

  void close() {
    std::deque<Action> left;
    {
      std::lock_guard lock(mutex);
      closed = true;
      left = std::exchange(queue, {});
    }
    cv.notify_all();
    for (auto& a : left)
      if (a.reply) a.reply->set_value(error(503, "monitor shut down"));
  }
};

Monitor::Monitor(flesh::Simulation& sim, MonitorOptions options) : state_(std::make_shared<State>()) {
  if (options.norms.empty())
    for (const auto& e : sim.registry().evolved())
      if (const auto* g = sim.registry().find_group(e.group))
        for (const auto& v : g->variables) options.norms.push_back(io::dataset_name(g->name, v));
  state_->options = std::move(options);
  state_->specs = sim.params().specs();
  state_->publish(sim, false);
  sim.add_boundary_hook([s = state_](flesh::Simulation& sm) { s->on_boundary(sm); });
}

Monitor::~Monitor() {
  stop_server();
  state_->close();
}

Response Monitor::handle_request(const std::string& method, const std::string& target, const std::string& body) {
  const auto q = target.find('?');
  const std::string path = target.substr(0, q);
  const auto query = q == std::string::npos ? std::map<std::string, std::string>{}
                                            : parse_query(std::string_view(target).substr(q + 1));
  return state_->handle(method, path, query, body);
}

int Monitor::start_server(const std::string& host, int port) {
  stop_server();
  auto server = std::make_unique<httplib::Server>();
  auto handler = [s = state_](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const Response r = s->handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server->Get(R"(/.*)", handler);
  server->Post(R"(/.*)", handler);
  const int bound = port == 0 ? server->bind_to_any_port(host) : (server->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind monitor to " + host + ":" + std::to_string(port));
  state_->server = std::move(server);
  state_->server_thread = std::thread([srv = state_->server.get()] { srv->listen_after_bind(); });
  return bound;
}

void Monitor::stop_server() {
  if (!state_->server) return;
  state_->server->stop();
  if (state_->server_thread.joinable()) state_->server_thread.join();
  state_->server.reset();
}

std::string Monitor::status() const {
  std::lock_guard lock(state_->mutex);
  return state_->status;
}

std::int64_t Monitor::published() const {
  std::lock_guard lock(state_->mutex);
  return state_->published;
}

std::unique_ptr<Monitor> attach_from_params(flesh::Simulation& sim) {
  const auto& p = sim.params();
  if (!p.has("http::enabled") || !p.get_bool("http::enabled")) return nullptr;
  MonitorOptions opts;
  std::string list = p.get_string("http::norms");
  for (std::size_t start = 0; start < list.size();) {
    auto end = list.find(',', start);
    if (end == std::string::npos) end = list.size();
    if (end > start) opts.norms.push_back(list.substr(start, end - start));
    start = end + 1;
  }
  if (p.has("io::checkpoint_dir")) opts.checkpoint_dir = p.get_string("io::checkpoint_dir");
  auto m = std::make_unique<Monitor>(sim, opts);
  m->start_server(p.get_string("http::host"), static_cast<int>(p.get_int("http::port")));
  return m;
}

}  // namespace tapestry::monitor

#include "remi/service.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace remi {

using namespace protocol;
using nlohmann::json;

Service::Service(const EngineConfig& config) : engine_(config) {}

void Service::connect(ClientId id) { clients_.try_emplace(id); }

void Service::disconnect(ClientId id) {
    clients_.erase(id);
    if (controller_ == id)
        controller_.reset();
}

std::string Service::frame_text(ClientId id, const TelemetryFrame& frame, std::optional<json> reply_to) {
    json j = to_json(frame);
    auto& client = clients_[id];
    j["seq"] = client.seq++;
    if (reply_to)
        j["reply_to"] = *reply_to;
    if (auto* echo = std::get_if<ParamEcho>(&frame); echo)
        j["controller"] = controller_ == id;
    return j.dump();
}

void Service::fan_out(const std::vector<TelemetryFrame>& frames, std::vector<Delivery>& out) {
    for (const auto& frame : frames) {
        const std::string kind = kind_of(frame);
        for (auto& [id, client] : clients_)
            if (kind == "error" || client.kinds.contains(kind))
                out.push_back({id, frame_text(id, frame)});
    }
}

void Service::error_to(ClientId id, const std::string& code, const std::string& detail, std::optional<json> reply_to,
                       std::vector<Delivery>& out) {
    out.push_back({id, frame_text(id, ErrorFrame{code, detail}, std::move(reply_to))});
}

std::vector<Delivery> Service::on_text(ClientId id, std::string_view text) {
    std::vector<Delivery> out;
    connect(id);

    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        error_to(id, code::bad_message, "frame is not valid JSON", json(nullptr), out);
        return out;
    }
    json reply_to = j.is_object() && j.contains("seq") ? j["seq"] : json(nullptr);

    ControlMessage message;
    try {
        message = parse_control_message(j);
    } catch (const ProtocolError& e) {
        error_to(id, e.code(), e.what(), reply_to, out);
        return out;
    }

    const bool mutating = is_mutating(message);
    if (mutating) {
        if (!controller_)
            controller_ = id;
        if (controller_ != id) {
            error_to(id, code::not_controller, "another client holds the controller role", reply_to, out);
            return out;
        }
    }
    if (const auto* sub = std::get_if<Subscribe>(&message))
        clients_[id].kinds = sub->kinds;

    std::vector<TelemetryFrame> telemetry;
    ParamEcho echo;
    try {
        echo = engine_.apply(message, telemetry);
    } catch (const ProtocolError& e) {
        fan_out(telemetry, out);
        error_to(id, e.code(), e.what(), reply_to, out);
        return out;
    }
    fan_out(telemetry, out);
    out.push_back({id, frame_text(id, echo, reply_to)});
    if (mutating) {
        for (auto& [other, client] : clients_)
            if (other != id && client.kinds.contains("param_echo"))
                out.push_back({other, frame_text(other, echo)});
    }
    return out;
}

std::vector<Delivery> Service::on_tick() {
    std::vector<TelemetryFrame> telemetry;
    engine_.tick(telemetry);
    std::vector<Delivery> out;
    fan_out(telemetry, out);
    return out;
}

std::vector<Delivery> Service::on_flush() {
    std::vector<TelemetryFrame> telemetry;
    engine_.flush(telemetry);
    std::vector<Delivery> out;
    fan_out(telemetry, out);
    return out;
}

ServiceLoop::ServiceLoop(const EngineConfig& config, Sink sink) : service_(config), sink_(std::move(sink)) {}

ServiceLoop::~ServiceLoop() { stop(); }

void ServiceLoop::start() {
    std::lock_guard lock(mutex_);
    if (running_)
        return;
    stopping_ = false;
    running_ = true;
    accepting_ = true;
    thread_ = std::thread([this] { run(); });
}

void ServiceLoop::stop() {
    {
        std::lock_guard lock(mutex_);
        if (!running_)
            return;
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable())
        thread_.join();
    std::lock_guard lock(mutex_);
    running_ = false;
}

void ServiceLoop::push(Event e) {
    {
        std::lock_guard lock(mutex_);
        inbox_.push_back(std::move(e));
    }
    cv_.notify_all();
}

ClientId ServiceLoop::connect() {
    const ClientId id = next_id_++;
    push({Event::Kind::connect, id, {}, nullptr});
    return id;
}

void ServiceLoop::disconnect(ClientId id) { push({Event::Kind::disconnect, id, {}, nullptr}); }

void ServiceLoop::post(ClientId id, std::string text) { push({Event::Kind::text, id, std::move(text), nullptr}); }

SessionLog ServiceLoop::session_log() {
    auto reply = std::make_shared<std::promise<SessionLog>>();
    auto result = reply->get_future();
    {
        std::lock_guard lock(mutex_);
        if (!accepting_)
            return service_.engine().log();
        inbox_.push_back({Event::Kind::log_request, 0, {}, reply});
    }
    cv_.notify_all();
    return result.get();
}

void ServiceLoop::deliver(const std::vector<Delivery>& out) {
    if (!sink_)
        return;
    for (const auto& d : out)
        sink_(d);
}

void ServiceLoop::run() {
    using clock = std::chrono::steady_clock;
    constexpr auto flush_every = std::chrono::milliseconds(50);
    constexpr int max_catch_up = 1000;

    auto next_tick = clock::now();
    auto last_flush = next_tick;
    for (;;) {
        std::deque<Event> batch;
        {
            std::unique_lock lock(mutex_);
            auto ready = [this] { return stopping_ || !inbox_.empty(); };
            if (service_.engine().clock() == ClockMode::wall)
                cv_.wait_until(lock, next_tick, ready);
            else
                cv_.wait(lock, ready);
            if (stopping_)
                break;
            batch.swap(inbox_);
        }

        for (auto& e : batch) {
            switch (e.kind) {
            case Event::Kind::connect: service_.connect(e.client); break;
            case Event::Kind::disconnect: service_.disconnect(e.client); break;
            case Event::Kind::text: deliver(service_.on_text(e.client, e.text)); break;
            case Event::Kind::log_request: e.reply->set_value(service_.engine().log()); break;
            }
        }

        if (service_.engine().clock() != ClockMode::wall)
            continue;
        const auto now = clock::now();
        int caught_up = 0;
        while (now >= next_tick) {
            deliver(service_.on_tick());
            next_tick += std::chrono::duration_cast<clock::duration>(
                std::chrono::duration<double>(1.0 / service_.engine().tick_rate_hz()));
            if (++caught_up >= max_catch_up) {
                spdlog::warn("engine loop fell behind; skipping ahead");
                next_tick = now;
                break;
            }
        }
        if (now - last_flush >= flush_every) {
            deliver(service_.on_flush());
            last_flush = now;
        }
    }
    deliver(service_.on_flush());

    // Answer log requests that raced with shutdown.
    std::lock_guard lock(mutex_);
    accepting_ = false;
    for (auto& e : inbox_)
        if (e.kind == Event::Kind::log_request)
            e.reply->set_value(service_.engine().log());
    inbox_.clear();
}

} // namespace remi

#include "ultrascale/job.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "job_internal.hpp"

namespace us {

namespace {

// Maps each JSON pointer to the byte offset of its value; run only on text nlohmann accepted.
class PosIndex {
public:
    explicit PosIndex(const std::string& s) : s_(s) {
        skip_ws();
        value("");
    }
    std::size_t at(const std::string& ptr) const {
        auto it = pos_.find(ptr);
        return it == pos_.end() ? 0 : it->second;
    }

private:
    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    std::string string_token() {
        std::string out;
        ++i_;  // opening quote
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                char e = s_[i_ + 1];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                i_ += 2;
            } else {
                out += s_[i_++];
            }
        }
        ++i_;
        return out;
    }
    static std::string escape(const std::string& k) {
        std::string o;
        for (char c : k) {
            if (c == '~') o += "~0";
            else if (c == '/') o += "~1";
            else o += c;
        }
        return o;
    }
    void value(const std::string& ptr) {
        pos_[ptr] = i_;
        if (i_ >= s_.size()) return;
        char c = s_[i_];
        if (c == '{') {
            ++i_;
            skip_ws();
            while (i_ < s_.size() && s_[i_] != '}') {
                std::string key = string_token();
                skip_ws();
                ++i_;  // colon
                skip_ws();
                value(ptr + "/" + escape(key));
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip_ws();
            }
            ++i_;
        } else if (c == '[') {
            ++i_;
            skip_ws();
            for (std::size_t k = 0; i_ < s_.size() && s_[i_] != ']'; ++k) {
                value(ptr + "/" + std::to_string(k));
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip_ws();
            }
            ++i_;
        } else if (c == '"') {
            string_token();
        } else {
            while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
        }
    }

    const std::string& s_;
    std::size_t i_ = 0;
    std::map<std::string, std::size_t> pos_;
};

std::pair<int, int> line_col(const std::string& s, std::size_t off) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < off && i < s.size(); ++i) {
        if (s[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

class Parser {
public:
    Parser(const std::string& text, const std::string& source) : text_(text), source_(source) {}

    JobConfig run() {
        try {
            root_ = ojson::parse(text_);
        } catch (const nlohmann::json::parse_error& e) {
            // byte is 1-based and points at the offending character
            auto [l, c] = line_col(text_, e.byte > 0 ? e.byte - 1 : 0);
            std::string msg = e.what();
            auto k = msg.find("parse error");
            throw ParseError(source_, l, c, k == std::string::npos ? msg : msg.substr(k));
        }
        idx_ = std::make_unique<PosIndex>(text_);
        if (!root_.is_object()) fail("", "config must be a JSON object");
        JobConfig c;
        for (auto& [k, v] : root_.items()) {
            if (k == "version") {
                if (v != "1") fail("/version", "unsupported version");
            } else if (k != "objects" && k != "tasks" && k != "output") {
                fail("/" + k, "unknown top-level key '" + k + "'");
            }
        }
        if (root_.contains("objects")) objects(c);
        if (root_.contains("tasks")) tasks(c);
        if (root_.contains("output")) output(c);
        check_cycles(c);
        return c;
    }

private:
    [[noreturn]] void fail(const std::string& ptr, const std::string& msg, Errc code = Errc::ParseError) const {
        auto [l, c] = line_col(text_, idx_ ? idx_->at(ptr) : 0);
        if (code == Errc::ParseError) throw ParseError(source_, l, c, msg);
        throw Error(code, source_ + ":" + std::to_string(l) + ":" + std::to_string(c) + ": " + msg);
    }

    std::map<std::string, RefValue> refs(const ojson& j, const std::string& ptr,
                                         const detail::KindInfo& info, const std::string& owner) {
        std::map<std::string, RefValue> out;
        if (!j.is_object()) fail(ptr, "refs must be an object");
        for (auto& [role, v] : j.items()) {
            const std::string rp = ptr + "/" + role;
            auto spec = std::find_if(info.roles.begin(), info.roles.end(), [&](const auto& r) { return r.role == role; });
            if (spec == info.roles.end()) fail(rp, owner + " takes no reference '" + role + "'");
            RefValue rv;
            if (v.is_string()) {
                rv.names.push_back(v.get<std::string>());
            } else if (v.is_array()) {
                rv.list = true;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (!v[i].is_string()) fail(rp + "/" + std::to_string(i), "reference must be an object name");
                    rv.names.push_back(v[i].get<std::string>());
                }
            } else {
                fail(rp, "reference must be an object name or a list of names");
            }
            if (rv.list != spec->list) fail(rp, spec->list ? "reference '" + role + "' takes a list" : "reference '" + role + "' takes one name");
            for (std::size_t i = 0; i < rv.names.size(); ++i) {
                const std::string site = rv.list ? rp + "/" + std::to_string(i) : rp;
                auto it = types_.find(rv.names[i]);
                if (it == types_.end()) fail(site, "reference to undeclared object '" + rv.names[i] + "'");
                if (it->second != spec->type)
                    fail(site, "'" + rv.names[i] + "' is a " + it->second + ", expected a " + spec->type);
            }
            out[role] = rv;
        }
        for (const auto& r : info.roles)
            if (r.required && !out.count(r.role)) fail(ptr, owner + " needs reference '" + r.role + "'");
        return out;
    }

    void objects(JobConfig& c) {
        const ojson& objs = root_["objects"];
        if (!objs.is_object()) fail("/objects", "objects must be an object of named declarations");
        // types first so forward references resolve
        for (auto& [name, d] : objs.items()) {
            const std::string p = "/objects/" + name;
            if (!d.is_object()) fail(p, "declaration must be an object");
            if (!d.contains("type") || !d["type"].is_string()) fail(p, "declaration needs a string 'type'");
            const std::string type = d["type"];
            if (!detail::object_table().count(type)) fail(p + "/type", "unknown object type '" + type + "'");
            types_[name] = type;
        }
        for (auto& [name, d] : objs.items()) {
            const std::string p = "/objects/" + name;
            ObjectDecl o;
            o.name = name;
            o.type = d["type"];
            for (auto& [k, v] : d.items()) {
                if (k == "type") continue;
                if (k == "refs") o.refs = refs(v, p + "/refs", detail::object_table().at(o.type), "object '" + name + "'");
                else o.params[k] = v;
            }
            if (!d.contains("refs")) refs(ojson::object(), p, detail::object_table().at(o.type), "object '" + name + "'");
            c.objects.push_back(std::move(o));
        }
    }

    void tasks(JobConfig& c) {
        const ojson& ts = root_["tasks"];
        if (!ts.is_array()) fail("/tasks", "tasks must be an array");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string p = "/tasks/" + std::to_string(i);
            const ojson& t = ts[i];
            if (!t.is_object()) fail(p, "task must be an object");
            TaskDecl d;
            for (auto& [k, v] : t.items())
                if (k != "id" && k != "kind" && k != "refs" && k != "params" && k != "expect" && k != "export")
                    fail(p + "/" + k, "unknown task key '" + k + "'");
            if (t.contains("id")) {
                if (!t["id"].is_string()) fail(p + "/id", "task id must be a string");
                d.id = t["id"];
            } else {
                d.id = "t" + std::to_string(i + 1);
            }
            if (!ids.insert(d.id).second) fail(t.contains("id") ? p + "/id" : p, "duplicate task id '" + d.id + "'");
            if (!t.contains("kind") || !t["kind"].is_string()) fail(p, "task needs a string 'kind'");
            d.kind = t["kind"];
            auto info = detail::task_table().find(d.kind);
            if (info == detail::task_table().end())
                fail(p + "/kind", "unknown task kind '" + d.kind + "'", Errc::UnknownTaskKind);
            d.refs = refs(t.contains("refs") ? t["refs"] : ojson::object(), t.contains("refs") ? p + "/refs" : p,
                          info->second, "task '" + d.id + "'");
            if (t.contains("params")) {
                if (!t["params"].is_object()) fail(p + "/params", "params must be an object");
                d.params = t["params"];
            }
            if (t.contains("expect")) {
                const ojson& e = t["expect"];
                if (!e.is_string() || (e != "holds" && e != "fails" && e != "inconclusive"))
                    fail(p + "/expect", "expect must be holds, fails or inconclusive");
                d.expect = e.get<std::string>();
            }
            if (t.contains("export")) {
                if (!t["export"].is_string()) fail(p + "/export", "export must be a path string");
                d.export_path = t["export"].get<std::string>();
            }
            c.tasks.push_back(std::move(d));
        }
    }

    void output(JobConfig& c) {
        const ojson& o = root_["output"];
        if (!o.is_object()) fail("/output", "output must be an object");
        for (auto& [k, v] : o.items()) {
            const std::string p = "/output/" + k;
            if (k == "format") {
                if (v != "json" && v != "text") fail(p, "format must be json or text");
                c.output.format = v;
            } else if (k == "path") {
                if (v.is_null()) continue;
                if (!v.is_string()) fail(p, "path must be a string");
                c.output.path = v.get<std::string>();
            } else if (k == "timestamp") {
                if (!v.is_boolean()) fail(p, "timestamp must be a boolean");
                c.output.timestamp = v;
            } else {
                fail(p, "unknown output key '" + k + "'");
            }
        }
    }

    void check_cycles(const JobConfig& c) {
        std::map<std::string, const ObjectDecl*> by;
        for (const auto& o : c.objects) by[o.name] = &o;
        std::map<std::string, int> state;  // 1 visiting, 2 done
        std::function<void(const std::string&)> dfs = [&](const std::string& n) {
            state[n] = 1;
            for (const auto& [role, rv] : by[n]->refs)
                for (const auto& m : rv.names) {
                    if (state[m] == 1) fail("/objects/" + n + "/refs/" + role, "reference cycle through '" + m + "'");
                    if (state[m] == 0) dfs(m);
                }
            state[n] = 2;
        };
        for (const auto& o : c.objects)
            if (state[o.name] == 0) dfs(o.name);
    }

    const std::string& text_;
    std::string source_;
    ojson root_;
    std::unique_ptr<PosIndex> idx_;
    std::map<std::string, std::string> types_;
};

ojson refs_json(const std::map<std::string, RefValue>& refs) {
    ojson r = ojson::object();
    for (const auto& [role, v] : refs) {
        if (v.list) r[role] = v.names;
        else r[role] = v.names.front();
    }
    return r;
}

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string text_value(const ojson& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt_double(v.get<double>());
    return v.dump();
}

}  // namespace

ParseError::ParseError(const std::string& source, int line, int col, const std::string& msg)
    : Error(Errc::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
      line_(line),
      col_(col) {}

JobConfig parse_config(const std::string& text, const std::string& source) { return Parser(text, source).run(); }

JobConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ojson serialize_config(const JobConfig& c) {
    ojson j;
    j["version"] = "1";
    ojson objs = ojson::object();
    for (const auto& o : c.objects) {
        ojson d;
        d["type"] = o.type;
        for (auto& [k, v] : o.params.items()) d[k] = v;
        if (!o.refs.empty()) d["refs"] = refs_json(o.refs);
        objs[o.name] = d;
    }
    j["objects"] = objs;
    ojson ts = ojson::array();
    for (const auto& t : c.tasks) {
        ojson d;
        d["id"] = t.id;
        d["kind"] = t.kind;
        if (!t.refs.empty()) d["refs"] = refs_json(t.refs);
        if (!t.params.empty()) d["params"] = t.params;
        if (t.expect) d["expect"] = *t.expect;
        if (t.export_path) d["export"] = *t.export_path;
        ts.push_back(d);
    }
    j["tasks"] = ts;
    ojson out;
    out["format"] = c.output.format;
    if (c.output.path) out["path"] = *c.output.path;
    out["timestamp"] = c.output.timestamp;
    j["output"] = out;
    return j;
}

const std::vector<std::string>& task_kinds() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> v;
        for (const auto& [name, info] : detail::task_table()) v.push_back(name);
        return v;
    }();
    return k;
}

TaskResult run_task(const JobConfig& config, const TaskDecl& task, const RunOptions& opt) {
    std::vector<std::string> need;
    for (const auto& [role, rv] : task.refs) need.insert(need.end(), rv.names.begin(), rv.names.end());
    auto store = detail::build_objects(config, need);
    return detail::execute_task(*store, task, opt);
}

Report run_job(const JobConfig& config, const RunOptions& opt) {
    Report r;
    if (config.output.timestamp) r.timestamp = now_utc();
    auto store = detail::build_objects(config);
    const long n = static_cast<long>(config.tasks.size());
    r.tasks.resize(config.tasks.size());
    std::vector<std::exception_ptr> errs(config.tasks.size());
    // results land in declaration slots, so the report order never depends on scheduling
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (long i = 0; i < n; ++i) {
        try {
            r.tasks[static_cast<std::size_t>(i)] = detail::execute_task(*store, config.tasks[static_cast<std::size_t>(i)], opt);
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < errs.size(); ++i) {
        if (!errs[i]) continue;
        const std::string id = config.tasks[i].id;
        try {
            std::rethrow_exception(errs[i]);
        } catch (const Error& e) {
            throw Error(e.code(), "task " + id + ": " + e.message());
        } catch (const std::exception& e) {
            throw Error(Errc::PreconditionViolated, "task " + id + ": " + e.what());
        }
    }
    return r;
}

std::string emit_report(const Report& r, const std::string& format) {
    if (format == "text") {
        std::ostringstream os;
        if (r.timestamp) os << "timestamp: " << *r.timestamp << "\n\n";
        for (std::size_t i = 0; i < r.tasks.size(); ++i) {
            const TaskResult& t = r.tasks[i];
            if (i) os << "\n";
            os << "task " << t.task_id << " (" << t.kind << "): " << status_name(t.status) << "\n";
            os << "  citation: " << t.citation << "\n";
            for (auto& [k, v] : t.witnesses.items()) os << "  witness " << k << " = " << text_value(v) << "\n";
            for (auto& [k, v] : t.diagnostics.items()) os << "  " << k << ": " << text_value(v) << "\n";
        }
        return os.str();
    }
    if (format != "json") throw Error(Errc::OutOfRangeParam, "unknown report format '" + format + "'");
    ojson j;
    j["version"] = "1";
    if (r.timestamp) j["timestamp"] = *r.timestamp;
    j["tasks"] = ojson::array();
    for (const TaskResult& t : r.tasks) {
        ojson e;
        e["task_id"] = t.task_id;
        e["kind"] = t.kind;
        e["status"] = status_name(t.status);
        if (t.status != Status::Inconclusive || !t.witnesses.empty()) e["witnesses"] = t.witnesses;
        e["diagnostics"] = t.diagnostics;
        e["citation"] = t.citation;
        j["tasks"].push_back(e);
    }
    return j.dump() + "\n";
}

int exit_code(const Report& r) {
    for (const auto& t : r.tasks)
        if (t.expect_violated) return 1;
    return 0;
}

}

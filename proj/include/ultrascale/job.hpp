#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ultrascale/common.hpp"

namespace us {

using ojson = nlohmann::ordered_json;

// A reference is a single object name or a list of names (custom matrix members).
struct RefValue {
    std::vector<std::string> names;
    bool list = false;
    friend bool operator==(const RefValue&, const RefValue&) = default;
};

struct ObjectDecl {
    std::string name;
    std::string type;  // sequence, matrix, weight_fn, genfn, operator, grid_field
    ojson params = ojson::object();
    std::map<std::string, RefValue> refs;
    friend bool operator==(const ObjectDecl&, const ObjectDecl&) = default;
};

struct TaskDecl {
    std::string id;
    std::string kind;
    std::map<std::string, RefValue> refs;
    ojson params = ojson::object();
    std::optional<std::string> expect;       // holds, fails or inconclusive
    std::optional<std::string> export_path;  // CSV side output
    friend bool operator==(const TaskDecl&, const TaskDecl&) = default;
};

struct OutputSpec {
    std::string format = "json";
    std::optional<std::string> path;
    bool timestamp = false;
    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct JobConfig {
    std::vector<ObjectDecl> objects;  // declaration order
    std::vector<TaskDecl> tasks;
    OutputSpec output;
    friend bool operator==(const JobConfig&, const JobConfig&) = default;
};

// Parse failures carry the 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, int col, const std::string& msg);
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_, col_;
};

JobConfig parse_config(const std::string& text, const std::string& source = "<config>");
JobConfig load_config(const std::string& path);
ojson serialize_config(const JobConfig& c);

// Task kinds known to run_job.
const std::vector<std::string>& task_kinds();

struct TaskResult {
    std::string task_id;
    std::string kind;
    Status status = Status::Inconclusive;
    ojson witnesses = ojson::object();
    ojson diagnostics = ojson::object();
    std::string citation;
    bool expect_violated = false;  // expected holds, got fails
};

struct Report {
    std::vector<TaskResult> tasks;
    std::optional<std::string> timestamp;
};

struct RunOptions {
    bool parallel = false;
    std::string base_dir;  // relative export paths resolve against this
};

// Module errors are rethrown with the task id prefixed.
Report run_job(const JobConfig& config, const RunOptions& opt = {});
TaskResult run_task(const JobConfig& config, const TaskDecl& task, const RunOptions& opt = {});

std::string emit_report(const Report& r, const std::string& format);
int exit_code(const Report& r);

}

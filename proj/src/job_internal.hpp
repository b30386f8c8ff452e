#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ultrascale/job.hpp"

namespace us::detail {

struct RoleSpec {
    std::string role;
    std::string type;  // required object type
    bool required = true;
    bool list = false;
};

struct KindInfo {
    std::vector<RoleSpec> roles;
};

// Task kinds and object types with the reference roles each accepts.
const std::map<std::string, KindInfo>& task_table();
const std::map<std::string, KindInfo>& object_table();

struct ObjectStore;
std::shared_ptr<ObjectStore> build_objects(const JobConfig& c, const std::vector<std::string>& only = {});
TaskResult execute_task(const ObjectStore& store, const TaskDecl& t, const RunOptions& opt);

}

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ultrascale/job.hpp"

using namespace us;

namespace {

// "kind:key=val,key=val"; list values use '|', e.g. grid=1|2|3.
ojson scalar(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (!v.empty() && end && *end == '\0') return d;
    return v;
}

ojson parse_spec(const std::string& spec, const std::string& kind_key) {
    ojson o = ojson::object();
    auto colon = spec.find(':');
    o[kind_key] = spec.substr(0, colon);
    if (colon == std::string::npos) return o;
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(Errc::ParseError, "spec item '" + item + "' needs key=value");
        const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
        if (v.find('|') != std::string::npos) {
            ojson arr = ojson::array();
            std::stringstream vs(v);
            std::string e;
            while (std::getline(vs, e, '|')) arr.push_back(scalar(e));
            o[k] = arr;
        } else {
            o[k] = scalar(v);
        }
    }
    return o;
}

ojson parse_params(const std::vector<std::string>& kv) {
    ojson o = ojson::object();
    for (const auto& s : kv) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(Errc::ParseError, "--param '" + s + "' needs key=value");
        ojson spec = parse_spec("x:" + s, "_");
        o[s.substr(0, eq)] = spec[s.substr(0, eq)];
    }
    return o;
}

ObjectDecl object(const std::string& name, const std::string& type, const std::string& spec, const std::string& kind_key) {
    ObjectDecl d;
    d.name = name;
    d.type = type;
    d.params = parse_spec(spec, kind_key);
    return d;
}

RefValue one(const std::string& n) { return RefValue{{n}, false}; }

struct Common {
    std::string format = "json";
    std::string out;
    bool parallel = false;
    bool timestamp = false;
    bool print_config = false;
    std::string expect;
    std::string export_path;
    std::vector<std::string> params;
};

int emit(const JobConfig& cfg, const Common& c, const std::string& base_dir) {
    if (c.print_config) {
        std::cout << serialize_config(cfg).dump(2) << "\n";
        return 0;
    }
    RunOptions opt;
    opt.parallel = c.parallel;
    opt.base_dir = base_dir;
    Report r = run_job(cfg, opt);
    const std::string fmt = c.format.empty() ? cfg.output.format : c.format;
    const std::string text = emit_report(r, fmt);
    const std::string path = !c.out.empty() ? c.out : cfg.output.path.value_or("");
    if (path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << text)) throw Error(Errc::IoError, "cannot write report '" + path + "'");
    }
    return exit_code(r);
}

JobConfig single(std::vector<ObjectDecl> objs, TaskDecl t, const Common& c) {
    t.id = "t1";
    ojson extra = parse_params(c.params);
    for (auto& [k, v] : extra.items()) t.params[k] = v;
    if (!c.expect.empty()) t.expect = c.expect;
    if (!c.export_path.empty()) t.export_path = c.export_path;
    JobConfig cfg;
    cfg.objects = std::move(objs);
    cfg.tasks.push_back(std::move(t));
    cfg.output.timestamp = c.timestamp;
    // reparse so shorthand configs get the same validation as files
    return parse_config(serialize_config(cfg).dump(), "<command line>");
}

void add_common(CLI::App* app, Common& c, bool task_opts) {
    app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"json", "text"}));
    app->add_option("--out", c.out, "write the report here instead of stdout");
    app->add_flag("--parallel", c.parallel, "run independent tasks concurrently");
    app->add_flag("--timestamp", c.timestamp, "add a timestamp field to the report");
    if (task_opts) {
        app->add_option("--param", c.params, "task parameter key=value (repeatable, lists use |)");
        app->add_option("--expect", c.expect, "expected status")->check(CLI::IsMember({"holds", "fails", "inconclusive"}));
        app->add_option("--export", c.export_path, "CSV side output");
        app->add_flag("--print-config", c.print_config, "print the generated config and exit");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultrascale: weight sequences, matrices, weight functions and growth scales"};
    app.require_subcommand(1);
    Common c;
    c.format.clear();

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a config file");
    run->add_option("config", config_path, "config path")->required();
    add_common(run, c, false);

    std::string seq, prop;
    auto* cs = app.add_subcommand("check-seq", "check a sequence property, e.g. check-seq gevrey:s=2,K=100 --property LogConvex");
    cs->add_option("sequence", seq, "family spec")->required();
    cs->add_option("--property", prop, "property name")->required();
    add_common(cs, c, true);

    std::string a, b;
    bool as_matrix = false;
    auto* rel = app.add_subcommand("relate", "compare two sequences or matrices");
    rel->add_option("a", a)->required();
    rel->add_option("b", b)->required();
    rel->add_flag("--matrix", as_matrix, "specs describe weight matrices (kind:grid=...)");
    add_common(rel, c, true);

    std::string weight, wprop, lemma, sigma;
    auto* conj = app.add_subcommand("conjugate", "Young conjugate, weight properties and conjugate lemmas");
    conj->add_option("weight", weight, "weight spec, e.g. omega_s:s=2")->required();
    conj->add_option("--property", wprop, "check a weight property instead");
    conj->add_option("--lemma", lemma, "verify a conjugate lemma instead");
    conj->add_option("--sigma", sigma, "second weight for Mixed55");
    add_common(conj, c, true);

    std::string gen, cond;
    auto* sc = app.add_subcommand("scale", "scale conditions for a generating function");
    sc->add_option("genfn", gen, "spec, e.g. power:r=2,grid=1|2|4")->required();
    sc->add_option("--condition", cond, "single condition; omit for the full report");
    add_common(sc, c, true);

    std::string cls, op_spec = "op:order_d=2,char_type=elliptic";
    auto* loss = app.add_subcommand("loss", "regularity loss for iterates, e.g. loss gevrey:s=2 --operator op:order_d=2,char_type=hypoelliptic,vanishing_order=2");
    loss->add_option("class", cls, "class spec")->required();
    loss->add_option("--operator", op_spec, "operator spec");
    add_common(loss, c, true);

    std::string what;
    auto* probe = app.add_subcommand("probe", "spectral probe: mellin, metivier-growth or metivier-vector");
    probe->add_option("what", what)->required()->check(CLI::IsMember({"mellin", "metivier-growth", "metivier-vector"}));
    add_common(probe, c, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            JobConfig cfg = load_config(config_path);
            if (c.timestamp) cfg.output.timestamp = true;
            return emit(cfg, c, "");
        }
        if (cs->parsed()) {
            TaskDecl t;
            t.kind = "check_property";
            t.refs["sequence"] = one("M");
            t.params["property"] = prop;
            return emit(single({object("M", "sequence", seq, "family")}, t, c), c, "");
        }
        if (rel->parsed()) {
            TaskDecl t;
            t.kind = as_matrix ? "matrix_relate" : "compare_sequences";
            t.refs["a"] = one("A");
            t.refs["b"] = one("B");
            const std::string type = as_matrix ? "matrix" : "sequence";
            const std::string key = as_matrix ? "kind" : "family";
            return emit(single({object("A", type, a, key), object("B", type, b, key)}, t, c), c, "");
        }
        if (conj->parsed()) {
            std::vector<ObjectDecl> objs{object("W", "weight_fn", weight, "kind")};
            TaskDecl t;
            if (!lemma.empty()) {
                t.kind = "conjugate_lemma";
                t.refs["omega"] = one("W");
                t.params["lemma"] = lemma;
                if (!sigma.empty()) {
                    objs.push_back(object("S", "weight_fn", sigma, "kind"));
                    t.refs["sigma"] = one("S");
                }
            } else if (!wprop.empty()) {
                t.kind = "check_weight_property";
                t.refs["weight"] = one("W");
                t.params["property"] = wprop;
            } else {
                t.kind = "young_conjugate";
                t.refs["weight"] = one("W");
            }
            return emit(single(objs, t, c), c, "");
        }
        if (sc->parsed()) {
            TaskDecl t;
            t.refs["genfn"] = one("Z");
            if (cond.empty()) {
                t.kind = "scale_report";
            } else {
                t.kind = "scale_condition";
                t.params["condition"] = cond;
            }
            return emit(single({object("Z", "genfn", gen, "kind")}, t, c), c, "");
        }
        if (loss->parsed()) {
            ojson spec = parse_spec(cls, "class");
            TaskDecl t;
            t.kind = "loss_map";
            t.refs["operator"] = one("P");
            t.params = spec;
            ObjectDecl op = object("P", "operator", op_spec, "_");
            op.params.erase("_");
            return emit(single({op}, t, c), c, "");
        }
        if (probe->parsed()) {
            TaskDecl t;
            t.kind = what == "mellin" ? "gaussian_mellin" : what == "metivier-growth" ? "metivier_growth" : "metivier_vector";
            return emit(single({}, t, c), c, "");
        }
    } catch (const Error& e) {
        std::cerr << "ultrascale: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ultrascale: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

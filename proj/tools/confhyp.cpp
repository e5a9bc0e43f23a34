#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "confhyp/spec_io.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw confhyp::SpecError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void apply_overrides(confhyp::MetricSpec& spec, int order, const std::string& mode,
                     const std::string& base_point) {
    if (order > 0) spec.order = order;
    if (!mode.empty()) {
        if (mode != "rational" && mode != "float")
            throw confhyp::SpecError("--mode must be 'rational' or 'float'");
        spec.mode = mode;
    }
    if (!base_point.empty()) {
        std::vector<confhyp::Rational> bp;
        std::istringstream is(base_point);
        std::string tok;
        while (std::getline(is, tok, ',')) bp.push_back(confhyp::rational_from_string(tok));
        if (static_cast<int>(bp.size()) != spec.d)
            throw confhyp::SpecError("--base-point must have d entries");
        spec.base_point = bp;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact jet-arithmetic engine for extrinsic conformal hypersurface geometry"};
    std::string command, spec_path, mode, base_point, out_path, suite_path;
    int order = 0;
    app.add_option("command", command, "curvature|yamabe|willmore|forms|invariance")
        ->required();
    app.add_option("spec", spec_path, "metric spec JSON file");
    app.add_option("--order", order, "override jet truncation order");
    app.add_option("--mode", mode, "rational|float (overrides spec)");
    app.add_option("--base-point", base_point, "comma-separated rationals (overrides spec)");
    app.add_option("--out", out_path, "write the report here instead of stdout");
    app.add_option("--suite", suite_path, "JSON array of spec files (or {command, spec} entries)");
    CLI11_PARSE(app, argc, argv);

    try {
        confhyp::ordered_json result;
        bool all_pass = true;
        auto run_one = [&](const std::string& cmd, const std::string& path) {
            confhyp::MetricSpec spec = confhyp::parse_metric_spec(read_file(path));
            apply_overrides(spec, order, mode, base_point);
            confhyp::ordered_json rep = confhyp::run_command(cmd, spec);
            all_pass = all_pass && rep["pass"].get<bool>();
            return rep;
        };
        if (!suite_path.empty()) {
            auto suite = confhyp::ordered_json::parse(read_file(suite_path));
            if (!suite.is_array()) throw confhyp::SpecError("--suite file must hold a JSON array");
            std::filesystem::path base = std::filesystem::path(suite_path).parent_path();
            result = confhyp::ordered_json::array();
            for (const auto& entry : suite) {
                std::string cmd = command, path;
                if (entry.is_string()) {
                    path = entry.get<std::string>();
                } else {
                    path = entry.at("spec").get<std::string>();
                    if (entry.contains("command")) cmd = entry["command"].get<std::string>();
                }
                result.push_back(run_one(cmd, (base / path).string()));
            }
        } else {
            if (spec_path.empty()) throw confhyp::SpecError("spec file required (or use --suite)");
            result = run_one(command, spec_path);
        }
        std::string text = result.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw confhyp::SpecError("cannot write file: " + out_path);
            out << text;
        }
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

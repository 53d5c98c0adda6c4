#ifndef THINHOMOG_REPORT_HPP
#define THINHOMOG_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "common.hpp"

namespace thinhomog {

inline nlohmann::json checks_to_json(const std::vector<Check> &checks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &c : checks)
        arr.push_back({{"name", c.name},
                       {"passed", c.passed},
                       {"measured", c.measured},
                       {"threshold", c.threshold}});
    return arr;
}

/*! Summary document: schema 1. Keys serialize alphabetically and no
    volatile data (wall time, host) is included, so a rerun with the same
    timestamp is byte-identical. */
inline nlohmann::json report_to_json(const StudyReport &rep, const std::string &command,
                                     const std::string &timestamp,
                                     const nlohmann::json &config_echo) {
    nlohmann::json j;
    j["schema"] = 1;
    j["version"] = kVersion;
    j["command"] = command;
    j["timestamp"] = timestamp;
    j["pass"] = rep.pass();
    j["config"] = config_echo;
    // artifact location is environment, not experiment: identical runs into
    // different directories must still produce identical summaries
    if (j["config"].is_object()) j["config"].erase("out");
    j["kind"] = rep.kind;
    j["columns"] = rep.columns;
    j["rows"] = rep.rows;
    nlohmann::json fits = nlohmann::json::object();
    for (const auto &[k, v] : rep.fits) fits[k] = v;
    j["fits"] = fits;
    j["checks"] = checks_to_json(rep.checks);
    return j;
}

inline std::string report_to_csv(const StudyReport &rep) {
    std::ostringstream os;
    os << "# " << rep.kind << ": ";
    for (std::size_t i = 0; i < rep.columns.size(); ++i)
        os << (i ? ", " : "") << rep.columns[i];
    os << '\n';
    for (std::size_t i = 0; i < rep.columns.size(); ++i)
        os << (i ? "," : "") << rep.columns[i];
    os << '\n';
    for (const auto &row : rep.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt_g(row[i]);
        os << '\n';
    }
    return os.str();
}

//! Gnuplot-style blocks: one (x, y) block per group value.
inline std::string report_to_plotdata(const StudyReport &rep) {
    std::ostringstream os;
    os << "# " << rep.kind << ": " << rep.columns[rep.plot_y] << " vs "
       << rep.columns[rep.plot_x];
    if (rep.plot_group >= 0) os << " per " << rep.columns[rep.plot_group];
    os << '\n';
    std::vector<double> groups;
    if (rep.plot_group >= 0) {
        for (const auto &r : rep.rows) {
            bool seen = false;
            for (double g : groups) seen = seen || g == r[rep.plot_group];
            if (!seen) groups.push_back(r[rep.plot_group]);
        }
    } else {
        groups.push_back(0);
    }
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (rep.plot_group >= 0)
            os << "# " << rep.columns[rep.plot_group] << " = " << fmt_g(groups[gi]) << '\n';
        for (const auto &r : rep.rows) {
            if (rep.plot_group >= 0 && r[rep.plot_group] != groups[gi]) continue;
            os << fmt_g(r[rep.plot_x]) << ' ' << fmt_g(r[rep.plot_y]) << '\n';
        }
        if (gi + 1 < groups.size()) os << '\n';
    }
    return os.str();
}

inline void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << content;
    if (!f) throw ConfigError("write failed: " + path);
}

/*! Emit <command>_<timestamp>.{json,csv,plot} into out_dir. The JSON
    summary is always written; csv/plotdata follow the formats list.
    Returns the written paths. */
inline std::vector<std::string> emit_report(const std::string &out_dir,
                                            const std::string &command,
                                            const std::string &timestamp, const StudyReport &rep,
                                            const nlohmann::json &config_echo,
                                            const std::vector<std::string> &formats) {
    std::vector<std::string> paths;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec); // a failure surfaces on write below
    const std::string stem = out_dir + "/" + command + "_" + timestamp;
    write_text_file(stem + ".json",
                    report_to_json(rep, command, timestamp, config_echo).dump(2) + "\n");
    paths.push_back(stem + ".json");
    for (const auto &f : formats) {
        if (f == "csv") {
            write_text_file(stem + ".csv", report_to_csv(rep));
            paths.push_back(stem + ".csv");
        } else if (f == "plotdata") {
            write_text_file(stem + ".plot", report_to_plotdata(rep));
            paths.push_back(stem + ".plot");
        } else if (f != "json") {
            throw ConfigError("unknown output format: " + f);
        }
    }
    return paths;
}

} // namespace thinhomog

#endif

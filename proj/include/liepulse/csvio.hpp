#pragma once

#include "liepulse/hardware.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Deterministic CSV and flat key-value config I/O. Every float is printed
// with %.17g so re-running with the same inputs produces byte-identical
// files.

namespace liepulse {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Rotating-frame waveform CSV: header `time_s,cx_rad_s,cy_rad_s` preceded by
/// an interpolation comment. Hold waveforms carry slice start times, Linear
/// waveforms node times.
inline std::string waveform_csv(const RotatingWaveform& w) {
    w.validate();
    std::string out;
    out += std::string("# interpolation: ") +
           (w.interp == EnvelopeInterp::Hold ? "hold" : "linear") + "\n";
    out += "time_s,cx_rad_s,cy_rad_s\n";
    for (int j = 0; j < w.points(); ++j)
        out += format_double(j / w.sample_rate) + "," + format_double(w.cx[j]) + "," +
               format_double(w.cy[j]) + "\n";
    return out;
}

inline void write_waveform_csv(const std::string& path, const RotatingWaveform& w) {
    write_text_file(path, waveform_csv(w));
}

inline std::string lab_csv(const LabWaveform& w) {
    w.validate();
    std::string out = "time_s,v\n";
    for (Eigen::Index j = 0; j < w.v.size(); ++j)
        out += format_double((j + 0.5) / w.sample_rate) + "," + format_double(w.v[j]) + "\n";
    return out;
}

inline RotatingWaveform read_waveform_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open waveform CSV: " + path);
    RotatingWaveform w;
    w.interp = EnvelopeInterp::Linear;
    std::vector<double> times, cx, cy;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("hold") != std::string::npos) w.interp = EnvelopeInterp::Hold;
            continue;
        }
        if (line.rfind("time_s", 0) == 0) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("waveform CSV: expected 3 columns: " + path);
            vals[c] = std::stod(cell);
        }
        times.push_back(vals[0]);
        cx.push_back(vals[1]);
        cy.push_back(vals[2]);
    }
    if (times.size() < 2) throw std::runtime_error("waveform CSV: too few rows: " + path);
    const double dt = times[1] - times[0];
    if (!(dt > 0)) throw std::runtime_error("waveform CSV: times must increase: " + path);
    for (std::size_t j = 1; j < times.size(); ++j)
        if (std::abs(times[j] - times[j - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::runtime_error("waveform CSV: grid must be uniform: " + path);
    w.sample_rate = 1.0 / dt;
    w.cx = Eigen::Map<Eigen::VectorXd>(cx.data(), cx.size());
    w.cy = Eigen::Map<Eigen::VectorXd>(cy.data(), cy.size());
    return w;
}

/// Flat key-value configuration with section-prefixed keys, e.g.
/// `broadband.seeds = 1,2,3`. Lines starting with # are comments.
struct Config {
    std::map<std::string, std::string> values;

    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) continue;
            cfg.values[key] = value;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    double get(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw std::runtime_error("config: bad numeric value for " + key);
        }
    }

    int get(const std::string& key, int fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            return std::stoi(it->second);
        } catch (const std::exception&) {
            throw std::runtime_error("config: bad integer value for " + key);
        }
    }

    std::vector<std::uint64_t> get_seeds(const std::string& key,
                                         std::vector<std::uint64_t> fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::vector<std::uint64_t> out;
        std::istringstream ss(it->second);
        std::string cell;
        while (std::getline(ss, cell, ','))
            if (!cell.empty()) out.push_back(std::stoull(cell));
        if (out.empty()) throw std::runtime_error("config: empty seed list for " + key);
        return out;
    }

    std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::vector<int> out;
        std::istringstream ss(it->second);
        std::string cell;
        while (std::getline(ss, cell, ','))
            if (!cell.empty()) out.push_back(std::stoi(cell));
        if (out.empty()) throw std::runtime_error("config: empty integer list for " + key);
        return out;
    }
};

} // namespace liepulse

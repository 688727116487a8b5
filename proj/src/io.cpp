#include "nmrbell/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nmrbell::io {

using nlohmann::json;

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string pairs_to_json(const CVector& flat) {
    std::string out = "[";
    for (Eigen::Index k = 0; k < flat.size(); ++k) {
        if (k) out += ", ";
        out += "[" + format_real(flat(k).real()) + ", " +
               format_real(flat(k).imag()) + "]";
    }
    out += "]";
    return out;
}

CVector flatten_rowmajor(const CMatrix& m) {
    CVector flat(m.size());
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat(idx++) = m(i, j);
    return flat;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::vector<std::string>& required,
                const std::string& what) {
    if (!obj.is_object()) throw FormatError(what + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw FormatError(what + ": unknown key '" + key + "'");
    }
    for (const auto& key : required)
        if (!obj.contains(key))
            throw FormatError(what + ": missing key '" + key + "'");
}

CVector pairs_from_json(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw FormatError(what + ": data must be an array");
    CVector flat(arr.size());
    Eigen::Index idx = 0;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() ||
            !item[1].is_number())
            throw FormatError(what + ": entries must be [re, im] pairs");
        flat(idx++) = qstate::Complex{item[0].get<double>(), item[1].get<double>()};
    }
    return flat;
}

struct StatePayload {
    Eigen::Index dim = 0;
    CVector flat;
};

StatePayload state_payload(const std::string& text, const std::string& what) {
    json j = parse(text);
    check_keys(j, {"dim", "data"}, {"dim", "data"}, what);
    if (!j["dim"].is_number_integer())
        throw FormatError(what + ": dim must be an integer");
    StatePayload p;
    p.dim = j["dim"].get<Eigen::Index>();
    p.flat = pairs_from_json(j["data"], what);
    return p;
}

}  // namespace

std::string state_to_json(const StateVector& psi) {
    return "{\"dim\": " + std::to_string(psi.dim()) +
           ", \"data\": " + pairs_to_json(psi.amplitudes()) + "}\n";
}

std::string density_to_json(const DensityMatrix& rho) {
    return "{\"dim\": " + std::to_string(rho.dim()) +
           ", \"data\": " + pairs_to_json(flatten_rowmajor(rho.matrix())) + "}\n";
}

StateVector state_from_json(const std::string& text) {
    StatePayload p = state_payload(text, "state file");
    if (p.flat.size() != p.dim)
        throw FormatError("state file: data length does not match dim");
    try {
        return StateVector(p.flat);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("state file: ") + e.what());
    }
}

DensityMatrix density_from_json(const std::string& text) {
    StatePayload p = state_payload(text, "density file");
    if (p.flat.size() != p.dim * p.dim)
        throw FormatError("density file: data length does not match dim^2");
    CMatrix m(p.dim, p.dim);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < p.dim; ++i)
        for (Eigen::Index j = 0; j < p.dim; ++j) m(i, j) = p.flat(idx++);
    try {
        return DensityMatrix(m);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("density file: ") + e.what());
    }
}

LoadedState load_state_file(const std::string& path) {
    std::string text = read_file(path);
    StatePayload p = state_payload(text, path);
    LoadedState out;
    if (p.flat.size() == p.dim) {
        out.is_pure = true;
        StateVector psi = state_from_json(text);
        out.amplitudes = psi.amplitudes();
        out.density = psi.density();
    } else if (p.flat.size() == p.dim * p.dim) {
        out.density = density_from_json(text).matrix();
    } else {
        throw FormatError(path + ": data length matches neither dim nor dim^2");
    }
    return out;
}

std::string circuit_to_json(const circuits::Circuit& c) {
    std::string out = "[";
    bool first = true;
    for (const auto& g : c.gates()) {
        if (!first) out += ", ";
        first = false;
        if (g.kind == circuits::Gate::Kind::Rotation) {
            const char* name = g.axis == circuits::Axis::X   ? "rx"
                               : g.axis == circuits::Axis::Y ? "ry"
                                                             : "rz";
            out += std::string("{\"gate\": \"") + name + "\", \"targets\": [" +
                   std::to_string(g.targets[0]) +
                   "], \"angle\": " + format_real(g.angle) + "}";
        } else if (g.kind == circuits::Gate::Kind::Cnot) {
            out += "{\"gate\": \"cnot\", \"targets\": [" +
                   std::to_string(g.targets[0]) + ", " +
                   std::to_string(g.targets[1]) + "]}";
        } else {
            throw FormatError("custom gates have no JSON form");
        }
    }
    out += "]\n";
    return out;
}

circuits::Circuit circuit_from_json(const std::string& text) {
    json j = parse(text);
    if (!j.is_array()) throw FormatError("circuit file must be a JSON array");
    circuits::Circuit c(3);
    for (const auto& item : j) {
        check_keys(item, {"gate", "targets", "angle"}, {"gate", "targets"},
                   "circuit gate");
        std::string gate = item["gate"].get<std::string>();
        std::vector<int> targets = item["targets"].get<std::vector<int>>();
        if (gate == "cnot") {
            if (item.contains("angle"))
                throw FormatError("circuit gate: cnot takes no angle");
            if (targets.size() != 2)
                throw FormatError("circuit gate: cnot needs two targets");
            c.add(circuits::Gate::cnot(targets[0], targets[1]));
            continue;
        }
        circuits::Axis axis;
        if (gate == "rx")
            axis = circuits::Axis::X;
        else if (gate == "ry")
            axis = circuits::Axis::Y;
        else if (gate == "rz")
            axis = circuits::Axis::Z;
        else
            throw FormatError("circuit gate: unknown gate '" + gate + "'");
        if (!item.contains("angle") || !item["angle"].is_number())
            throw FormatError("circuit gate: rotation needs a numeric angle");
        if (targets.size() != 1)
            throw FormatError("circuit gate: rotation needs one target");
        c.add(circuits::Gate::rotation(axis, item["angle"].get<double>(),
                                       targets[0]));
    }
    return c;
}

std::string events_to_json(const std::vector<nmr::Event>& events) {
    std::string out = "[";
    bool first = true;
    for (const auto& e : events) {
        if (!first) out += ", ";
        first = false;
        if (e.kind == nmr::Event::Kind::Delay) {
            out += "{\"kind\": \"delay\", \"duration\": " +
                   format_real(e.duration) + "}";
        } else {
            out += "{\"kind\": \"rf\", \"targets\": [";
            for (size_t i = 0; i < e.targets.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(e.targets[i]);
            }
            out += "], \"angle\": " + format_real(e.angle) +
                   ", \"phase\": " + format_real(e.phase) +
                   ", \"duration\": " + format_real(e.duration) + "}";
        }
    }
    out += "]\n";
    return out;
}

std::vector<nmr::Event> events_from_json(const std::string& text) {
    json j = parse(text);
    if (!j.is_array()) throw FormatError("event file must be a JSON array");
    std::vector<nmr::Event> out;
    for (const auto& item : j) {
        check_keys(item, {"kind", "targets", "angle", "phase", "duration"},
                   {"kind"}, "pulse event");
        std::string kind = item["kind"].get<std::string>();
        if (kind == "delay") {
            if (!item.contains("duration"))
                throw FormatError("pulse event: delay needs a duration");
            out.push_back(nmr::Event::delay(item["duration"].get<double>()));
        } else if (kind == "rf") {
            for (const char* k : {"targets", "angle", "phase"})
                if (!item.contains(k))
                    throw FormatError(std::string("pulse event: rf needs ") + k);
            out.push_back(nmr::Event::rf(
                item["targets"].get<std::vector<int>>(),
                item["angle"].get<double>(), item["phase"].get<double>(),
                item.value("duration", 0.0)));
        } else {
            throw FormatError("pulse event: unknown kind '" + kind + "'");
        }
    }
    return out;
}

std::string records_to_json(const std::vector<tomography::MeasurementRecord>& recs) {
    std::string out = "[";
    bool first = true;
    for (const auto& r : recs) {
        if (!first) out += ",\n ";
        first = false;
        CVector flat(12);
        for (int m = 0; m < 12; ++m) flat(m) = r.amplitudes[m];
        out += "{\"setting\": \"" + r.setting.label +
               "\", \"amplitudes\": " + pairs_to_json(flat) +
               ", \"noise_sigma\": " + format_real(r.noise_sigma) +
               ", \"seed\": " + std::to_string(r.seed) + "}";
    }
    out += "]\n";
    return out;
}

std::vector<tomography::MeasurementRecord> records_from_json(
    const std::string& text) {
    json j = parse(text);
    if (!j.is_array()) throw FormatError("records file must be a JSON array");
    std::vector<tomography::MeasurementRecord> out;
    for (const auto& item : j) {
        check_keys(item, {"setting", "amplitudes", "noise_sigma", "seed"},
                   {"setting", "amplitudes"}, "measurement record");
        CVector flat = pairs_from_json(item["amplitudes"], "measurement record");
        if (flat.size() != 12)
            throw FormatError("measurement record: expected 12 amplitudes");
        tomography::MeasurementRecord rec{
            tomography::Setting(item["setting"].get<std::string>()),
            {},
            item.value("noise_sigma", 0.0),
            item.value("seed", std::uint64_t{0})};
        for (int m = 0; m < 12; ++m) rec.amplitudes[m] = flat(m);
        out.push_back(std::move(rec));
    }
    return out;
}

std::string reconstruction_to_json(const tomography::Reconstruction& rec) {
    std::string rho = density_to_json(rec.rho_hat);
    if (!rho.empty() && rho.back() == '\n') rho.pop_back();
    return "{\"rho_hat\": " + rho +
           ", \"residual\": " + format_real(rec.residual) +
           ", \"iterations\": " + std::to_string(rec.iterations) +
           ", \"converged\": " + (rec.converged ? "true" : "false") + "}\n";
}

std::string grape_controls_to_csv(const Eigen::MatrixXd& controls) {
    if (controls.cols() != 6)
        throw FormatError("controls must have six columns");
    std::string out = "u1x,u1y,u2x,u2y,u3x,u3y\n";
    for (Eigen::Index k = 0; k < controls.rows(); ++k) {
        for (int c = 0; c < 6; ++c) {
            if (c) out += ",";
            out += format_real(controls(k, c));
        }
        out += "\n";
    }
    return out;
}

Eigen::MatrixXd grape_controls_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "u1x,u1y,u2x,u2y,u3x,u3y")
        throw FormatError("controls CSV: missing or wrong header row");
    std::vector<std::array<double, 6>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<double, 6> row{};
        std::istringstream ls(line);
        std::string cell;
        int c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= 6)
                throw FormatError("controls CSV: too many columns at line " +
                                  std::to_string(lineno));
            try {
                size_t used = 0;
                row[c] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw FormatError("controls CSV: bad number at line " +
                                  std::to_string(lineno));
            }
            ++c;
        }
        if (c != 6)
            throw FormatError("controls CSV: expected six columns at line " +
                              std::to_string(lineno));
        rows.push_back(row);
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 6);
    for (size_t k = 0; k < rows.size(); ++k)
        for (int c = 0; c < 6; ++c) m(static_cast<Eigen::Index>(k), c) = rows[k][c];
    return m;
}

std::string sweep_to_csv(const std::vector<bell::SweepPoint>& points) {
    std::string out = "theta_rad,t26_value\n";
    for (const auto& p : points)
        out += format_real(p.theta) + "," + format_real(p.value) + "\n";
    return out;
}

void emit_tomograph(const DensityMatrix& rho, const std::string& path_prefix) {
    auto write_part = [&](const std::string& suffix, bool real_part) {
        std::string out = "basis";
        for (int j = 1; j <= 8; ++j) out += "," + std::to_string(j);
        out += "\n";
        for (int i = 0; i < 8; ++i) {
            out += std::to_string(i + 1);
            for (int j = 0; j < 8; ++j) {
                double v = real_part ? rho.matrix()(i, j).real()
                                     : rho.matrix()(i, j).imag();
                out += "," + format_real(v);
            }
            out += "\n";
        }
        write_file(path_prefix + suffix, out);
    };
    write_part("_real.csv", true);
    write_part("_imag.csv", false);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory: " + p.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace nmrbell::io

#include "kppsh/io.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#ifndef KPPSH_VERSION
#define KPPSH_VERSION "unknown"
#endif

namespace kppsh::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const std::vector<CsvColumn>& columns) {
    size_t rows = 0;
    for (const auto& c : columns) rows = std::max(rows, c.text.empty() ? c.values.size() : c.text.size());
    std::string out;
    for (size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + csv_escape(columns[k].name);
    out += "\r\n";
    for (size_t r = 0; r < rows; ++r) {
        for (size_t k = 0; k < columns.size(); ++k) {
            if (k) out += ',';
            const auto& c = columns[k];
            if (!c.text.empty()) {
                if (r < c.text.size()) out += csv_escape(c.text[r]);
            } else if (r < c.values.size()) {
                out += format_double(c.values[r]);
            }
        }
        out += "\r\n";
    }
    return out;
}

void write_text(const fs::path& path, const std::string& s) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_csv(const fs::path& path, const std::vector<CsvColumn>& columns) { write_text(path, to_csv(columns)); }

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

json toml_to_json(const toml::node& n) {
    if (auto t = n.as_table()) {
        json o = json::object();
        for (auto&& [k, v] : *t) o[std::string(k.str())] = toml_to_json(v);
        return o;
    }
    if (auto a = n.as_array()) {
        json o = json::array();
        for (auto&& v : *a) o.push_back(toml_to_json(v));
        return o;
    }
    if (auto v = n.as_integer()) return v->get();
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_boolean()) return v->get();
    if (auto v = n.as_string()) return v->get();
    throw std::invalid_argument("config: unsupported TOML value type");
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json parse_toml(const std::string& text) {
    try {
        return toml_to_json(toml::parse(text));
    } catch (const toml::parse_error& e) {
        std::ostringstream ss;
        ss << "config: " << e.description() << " at line " << e.source().begin.line;
        throw std::invalid_argument(ss.str());
    }
}

json load_config(const fs::path& path) {
    const std::string text = read_text(path);
    if (path.extension() == ".json") return json::parse(text);
    return parse_toml(text);
}

SystemParams params_from_json(const json& root) {
    const json& j = root.contains("params") ? root.at("params") : root;
    SystemParams p;
    get_if(j, "d", p.d);
    get_if(j, "alpha", p.alpha);
    get_if(j, "beta", p.beta);
    get_if(j, "gamma", p.gamma);
    get_if(j, "sigma", p.sigma);
    get_if(j, "mu", p.mu);
    get_if(j, "mu0", p.mu0);
    p.validate();
    return p;
}

json to_json(const SystemParams& p) {
    return {{"d", p.d},         {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
            {"sigma", p.sigma}, {"mu", p.mu},       {"mu0", p.mu0}};
}

json to_json(const GateReport& g) {
    json j = {{"c_star", g.c_star},
              {"gamma_rem", g.gamma_rem},
              {"gamma_gl", g.gamma_gl},
              {"admissible", g.admissible},
              {"p_of_gamma", g.p_of_gamma}};
    if (g.gamma_interval)
        j["gamma_interval"] = {g.gamma_interval->first, g.gamma_interval->second};
    else
        j["gamma_interval"] = nullptr;
    return j;
}

SimConfig sim_config_from_json(const json& root) {
    SimConfig c;
    c.params = params_from_json(root);
    const json s = root.contains("simulate") ? root.at("simulate") : json::object();
    double x_min = c.grid.x_min, x_max = c.grid.x_max, dx = c.grid.dx();
    get_if(s, "x_min", x_min);
    get_if(s, "x_max", x_max);
    get_if(s, "dx", dx);
    c.grid = Grid1D::uniform_dx(x_min, x_max, dx);
    get_if(s, "dt", c.dt);
    get_if(s, "t_end", c.t_end);
    get_if(s, "sponge_width", c.sponge_width);
    get_if(s, "sponge_strength", c.sponge_strength);
    get_if(s, "record_every", c.record_every);
    get_if(s, "snapshot_every", c.snapshot_every);
    get_if(s, "seed", c.seed);
    get_if(s, "noise", c.noise);
    get_if(s, "wall_budget_seconds", c.wall_budget_seconds);
    if (s.contains("ic")) {
        for (const auto& b : s.at("ic")) {
            IcBump ic;
            get_if(b, "component", ic.component);
            get_if(b, "center", ic.center);
            get_if(b, "width", ic.width);
            get_if(b, "amplitude", ic.amplitude);
            c.ic.push_back(ic);
        }
    }
    return c;
}

json to_json(const SimConfig& c) {
    json ic = json::array();
    for (const auto& b : c.ic)
        ic.push_back({{"component", b.component}, {"center", b.center}, {"width", b.width}, {"amplitude", b.amplitude}});
    return {{"params", to_json(c.params)},
            {"simulate",
             {{"x_min", c.grid.x_min},
              {"x_max", c.grid.x_max},
              {"dx", c.grid.dx()},
              {"dt", c.dt},
              {"t_end", c.t_end},
              {"sponge_width", c.sponge_width},
              {"sponge_strength", c.sponge_strength},
              {"record_every", c.record_every},
              {"snapshot_every", c.snapshot_every},
              {"seed", c.seed},
              {"noise", c.noise},
              {"wall_budget_seconds", c.wall_budget_seconds},
              {"ic", ic}}}};
}

namespace {

void put_le64(std::string& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out += static_cast<char>((v >> (8 * k)) & 0xff);
}

std::uint64_t get_le64(const char* p) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[k])) << (8 * k);
    return v;
}

void put_f64(std::string& out, const std::vector<double>& a) {
    for (double x : a) put_le64(out, std::bit_cast<std::uint64_t>(x));
}

}  // namespace

void write_snapshot(const fs::path& path, const StateField& s) {
    const json header = {{"format", "kppsh-snapshot"},
                         {"version", 1},
                         {"endianness", "little"},
                         {"dtype", "f64"},
                         {"t", s.t},
                         {"grid",
                          {{"x_min", s.grid.x_min},
                           {"x_max", s.grid.x_max},
                           {"n", s.grid.n},
                           {"frame", to_string(s.grid.frame)},
                           {"periodic", s.grid.periodic}}},
                         {"fields", {"u", "v"}}};
    const std::string h = header.dump();
    std::string out;
    out.reserve(8 + h.size() + 16 * s.u.size());
    put_le64(out, h.size());
    out += h;
    put_f64(out, s.u);
    put_f64(out, s.v);
    write_text(path, out);
}

StateField read_snapshot(const fs::path& path) {
    const std::string raw = read_text(path);
    if (raw.size() < 8) throw std::runtime_error("snapshot: truncated header");
    const std::uint64_t hl = get_le64(raw.data());
    if (raw.size() < 8 + hl) throw std::runtime_error("snapshot: truncated header");
    const json h = json::parse(raw.substr(8, hl));
    if (h.at("endianness") != "little" || h.at("dtype") != "f64") throw std::runtime_error("snapshot: unsupported layout");
    StateField s;
    const auto& g = h.at("grid");
    s.grid.x_min = g.at("x_min");
    s.grid.x_max = g.at("x_max");
    s.grid.n = g.at("n");
    s.grid.periodic = g.at("periodic");
    s.grid.frame = g.at("frame") == "lab" ? Frame::lab : Frame::comoving;
    s.t = h.at("t");
    const size_t n = static_cast<size_t>(s.grid.n);
    const auto fields = h.at("fields");
    if (raw.size() != 8 + hl + 8 * n * fields.size()) throw std::runtime_error("snapshot: payload size mismatch");
    const char* p = raw.data() + 8 + hl;
    for (const auto& name : fields) {
        std::vector<double> a(n);
        for (size_t i = 0; i < n; ++i, p += 8) a[i] = std::bit_cast<double>(get_le64(p));
        if (name == "u") s.u = std::move(a);
        else if (name == "v") s.v = std::move(a);
    }
    return s;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

void RunManifest::add_output(const fs::path& dir, const std::string& rel) {
    outputs.emplace_back(rel, sha256_file(dir / rel));
}

json RunManifest::to_json() const {
    json out = json::array();
    for (const auto& [p, h] : outputs) out.push_back({{"path", p}, {"sha256", h}});
    return {{"code_version", code_version},
            {"params", params},
            {"config", config},
            {"config_hash", config_hash},
            {"seeds", seeds},
            {"started", started},
            {"finished", finished},
            {"outputs", out}};
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string code_version() { return KPPSH_VERSION; }

}  // namespace kppsh::io

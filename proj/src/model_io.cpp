#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "cropcast/error.hpp"
#include "cropcast/models.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

namespace {

constexpr int kFormatVersion = 1;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    std::filesystem::path p = stem;
    p += suffix;
    return p;
}

void write_blob(const std::filesystem::path& file, const Eigen::VectorXd& values) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        std::array<char, 8> bytes{};
        for (std::size_t b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffU);
        out.write(bytes.data(), 8);
    }
    if (!out) throw Error("failed writing " + file.string());
}

Eigen::VectorXd read_blob(const std::filesystem::path& file, Eigen::Index expected) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    Eigen::VectorXd values(expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
        std::array<unsigned char, 8> bytes{};
        if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
            throw ShapeError(file.string() + " holds fewer than " + std::to_string(expected) + " values");
        }
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        values[i] = std::bit_cast<double>(bits);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ShapeError(file.string() + " has trailing bytes");
    return values;
}

const std::string& require(const Manifest& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw Error("model manifest lacks '" + key + "'");
    return it->second;
}

template <typename T>
T require_int(const Manifest& m, const std::string& key) {
    const std::string& s = require(m, key);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("model manifest key '" + key + "' is not an integer: " + s);
    }
    return v;
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, std::initializer_list<double> tail) {
    Eigen::VectorXd out(a.size() + static_cast<Eigen::Index>(tail.size()));
    out.head(a.size()) = a;
    Eigen::Index i = a.size();
    for (double v : tail) out[i++] = v;
    return out;
}

struct Saver {
    Manifest& m;
    Eigen::VectorXd operator()(const MlpModel& x) const {
        m["input_width"] = std::to_string(x.input_width());
        m["hidden"] = std::to_string(x.hidden());
        m["horizon"] = std::to_string(x.horizon());
        m["seed"] = std::to_string(x.seed);
        m["iterations"] = std::to_string(x.iterations);
        m["converged"] = x.converged ? "1" : "0";
        return concat(x.parameters(), {x.target_mean, x.target_scale});
    }
    Eigen::VectorXd operator()(const LstmModel& x) const {
        m["input_width"] = std::to_string(x.input_width());
        m["seq_len"] = std::to_string(x.seq_len);
        m["units1"] = std::to_string(x.layer1.units());
        m["units2"] = std::to_string(x.layer2.units());
        m["horizon"] = std::to_string(x.horizon());
        m["seed"] = std::to_string(x.seed);
        return concat(x.parameters(), {x.target_mean, x.target_scale});
    }
    Eigen::VectorXd operator()(const ArBaseline& x) const {
        m["differencing"] = std::to_string(x.differencing);
        m["order"] = std::to_string(x.order);
        return concat(x.coefficients, {x.aic});
    }
};

}  // namespace

std::string model_type(const Model& model) {
    struct {
        std::string operator()(const MlpModel&) const { return "mlp"; }
        std::string operator()(const LstmModel&) const { return "lstm"; }
        std::string operator()(const ArBaseline&) const { return "ar_baseline"; }
    } name;
    return std::visit(name, model);
}

void write_manifest(const std::filesystem::path& file, const Manifest& manifest) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    for (const auto& [k, v] : manifest) {
        if (k.empty() || k.find_first_of("=\n\r") != std::string::npos || v.find_first_of("\n\r") != std::string::npos) {
            throw ValidationError("manifest entry '" + k + "' cannot be stored as a key=value line");
        }
        out << k << '=' << v << '\n';
    }
    if (!out) throw Error("failed writing " + file.string());
}

Manifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    Manifest m;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value", n);
        if (!m.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
            throw DuplicateKeyError("line " + std::to_string(n) + ": repeated key " + line.substr(0, eq));
        }
    }
    return m;
}

void save_model(const std::filesystem::path& stem, const Model& model, const Manifest& extra) {
    Manifest m = extra;
    m["format_version"] = std::to_string(kFormatVersion);
    m["type"] = model_type(model);
    const Eigen::VectorXd blob = std::visit(Saver{m}, model);
    m["values"] = std::to_string(blob.size());
    write_blob(with_suffix(stem, ".bin"), blob);
    write_manifest(with_suffix(stem, ".manifest"), m);
}

Model load_model(const std::filesystem::path& stem, Manifest* manifest) {
    Manifest m = read_manifest(with_suffix(stem, ".manifest"));
    if (require_int<int>(m, "format_version") != kFormatVersion) {
        throw VersionError("unsupported model format " + require(m, "format_version"));
    }
    const auto count = require_int<Eigen::Index>(m, "values");
    const Eigen::VectorXd blob = read_blob(with_suffix(stem, ".bin"), count);
    const std::string& type = require(m, "type");

    Model out;
    if (type == "mlp") {
        MlpModel x = mlp_init(require_int<Eigen::Index>(m, "input_width"), require_int<Eigen::Index>(m, "horizon"),
                              0, require_int<Eigen::Index>(m, "hidden"));
        if (count != x.parameter_count() + 2) throw ShapeError("MLP blob size does not match its shape");
        x.set_parameters(blob.head(x.parameter_count()));
        x.target_mean = blob[count - 2];
        x.target_scale = blob[count - 1];
        x.seed = require_int<std::uint64_t>(m, "seed");
        x.iterations = require_int<std::size_t>(m, "iterations");
        x.converged = require(m, "converged") == "1";
        out = std::move(x);
    } else if (type == "lstm") {
        LstmShape shape{require_int<Eigen::Index>(m, "units1"), require_int<Eigen::Index>(m, "units2")};
        LstmModel x = lstm_init(require_int<Eigen::Index>(m, "input_width"), require_int<Eigen::Index>(m, "seq_len"),
                                require_int<Eigen::Index>(m, "horizon"), 0, shape);
        if (count != x.parameter_count() + 2) throw ShapeError("LSTM blob size does not match its shape");
        x.set_parameters(blob.head(x.parameter_count()));
        x.target_mean = blob[count - 2];
        x.target_scale = blob[count - 1];
        x.seed = require_int<std::uint64_t>(m, "seed");
        out = std::move(x);
    } else if (type == "ar_baseline") {
        ArBaseline x;
        x.differencing = require_int<int>(m, "differencing");
        x.order = require_int<std::size_t>(m, "order");
        if (count != static_cast<Eigen::Index>(x.order) + 2) throw ShapeError("AR blob size does not match its order");
        x.coefficients = blob.head(count - 1);
        x.aic = blob[count - 1];
        out = std::move(x);
    } else {
        throw Error("unknown model type '" + type + "'");
    }
    if (manifest != nullptr) *manifest = std::move(m);
    return out;
}

}  // namespace cropcast

#include "entrochart/series.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "entrochart/errors.hpp"

namespace entrochart {

TimeSeries::TimeSeries(Eigen::VectorXd xs, Eigen::VectorXd ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) {
        throw ValidationError("xs and ys differ in length (" + std::to_string(xs_.size()) + " vs " +
                              std::to_string(ys_.size()) + ")");
    }
    if (ys_.size() < 2) throw ValidationError("a series needs at least 2 samples");
    if (!xs_.allFinite() || !ys_.allFinite()) throw ValidationError("series contains non-finite values");
    for (Eigen::Index i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1])) {
            throw ValidationError("xs must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

TimeSeries TimeSeries::from_values(Eigen::VectorXd ys) {
    Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(ys.size(), 0.0, static_cast<double>(ys.size() - 1));
    return TimeSeries(std::move(xs), std::move(ys));
}

double TimeSeries::y_stddev() const {
    const double mean = ys_.mean();
    return std::sqrt((ys_.array() - mean).square().mean());
}

double TimeSeries::interpolate(double x) const {
    const Eigen::Index n = xs_.size();
    if (x <= xs_[0]) return ys_[0];
    if (x >= xs_[n - 1]) return ys_[n - 1];
    const double* begin = xs_.data();
    const auto hi = static_cast<Eigen::Index>(std::upper_bound(begin, begin + n, x) - begin);
    const Eigen::Index lo = hi - 1;
    const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return ys_[lo] + t * (ys_[hi] - ys_[lo]);
}

namespace {

constexpr std::array<std::pair<BaseFunctionKind, std::string_view>, 8> kNames{{
    {BaseFunctionKind::Linear, "linear"},
    {BaseFunctionKind::Cosine, "cosine"},
    {BaseFunctionKind::Gaussian, "gaussian"},
    {BaseFunctionKind::Poly3, "poly3"},
    {BaseFunctionKind::IncreasingTrend, "increasing"},
    {BaseFunctionKind::DecreasingTrend, "decreasing"},
    {BaseFunctionKind::Peak, "peak"},
    {BaseFunctionKind::Trough, "trough"},
}};

}  // namespace

std::string_view to_string(BaseFunctionKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<BaseFunctionKind> parse_base_function(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

TimeSeries generate_base(BaseFunctionKind kind, Eigen::Index n_samples, Seed /*seed*/) {
    if (n_samples < 2) throw InvalidArgument("generate_base: n_samples must be >= 2");
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const Eigen::ArrayXd u = Eigen::ArrayXd::LinSpaced(n_samples, 0.0, 1.0);  // [0, 1]
    const Eigen::ArrayXd t = 2.0 * u - 1.0;                                    // [-1, 1]
    // Peak on sample (n - 1) / 2, rounded down.
    const double mid = static_cast<double>((n_samples - 1) / 2);
    const Eigen::ArrayXd from_mid =
        (Eigen::ArrayXd::LinSpaced(n_samples, 0.0, static_cast<double>(n_samples - 1)) - mid) /
        (0.5 * static_cast<double>(n_samples - 1));
    const auto bump = [&] { return (-from_mid.square() / (2.0 * 0.25 * 0.25)).exp().eval(); };

    Eigen::ArrayXd ys;
    switch (kind) {
        case BaseFunctionKind::Linear:
        case BaseFunctionKind::IncreasingTrend: ys = u; break;
        case BaseFunctionKind::DecreasingTrend: ys = 1.0 - u; break;
        case BaseFunctionKind::Cosine: ys = (kTwoPi * 2.0 * u).cos(); break;
        case BaseFunctionKind::Gaussian:
        case BaseFunctionKind::Peak: ys = bump(); break;
        case BaseFunctionKind::Trough: ys = -bump(); break;
        case BaseFunctionKind::Poly3: ys = t.cube() - 0.6 * t; break;
    }
    return TimeSeries::from_values(ys.matrix());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

TimeSeries parse_csv(std::string_view text) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t columns = 0;
    std::size_t x_col = 0;
    std::size_t y_col = 0;
    std::size_t line_no = 0;
    bool seen_data = false;

    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line =
            text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const auto fields = split_fields(line);
        if (!seen_data && columns == 0) {
            const bool numeric = std::all_of(fields.begin(), fields.end(),
                                             [](std::string_view f) { return parse_number(f).has_value(); });
            if (fields.size() < 1 || fields.size() > 2) {
                throw ParseError("expected 1 or 2 columns, got " + std::to_string(fields.size()), line_no);
            }
            columns = fields.size();
            if (columns == 2) {
                x_col = 0;
                y_col = 1;
            }
            if (!numeric) {
                if (columns == 2 && fields[0] == "y" && fields[1] == "x") {
                    x_col = 1;
                    y_col = 0;
                }
                continue;  // header
            }
        }
        if (fields.size() != columns) {
            throw ParseError("expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()),
                             line_no);
        }
        const auto y = parse_number(fields[y_col]);
        if (!y) throw ParseError("malformed number '" + std::string(fields[y_col]) + "'", line_no);
        ys.push_back(*y);
        if (columns == 2) {
            const auto x = parse_number(fields[x_col]);
            if (!x) throw ParseError("malformed number '" + std::string(fields[x_col]) + "'", line_no);
            xs.push_back(*x);
        }
        seen_data = true;
    }
    if (ys.size() < 2) throw ValidationError("a series needs at least 2 samples");

    Eigen::VectorXd y_vec = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    if (columns == 1) return TimeSeries::from_values(std::move(y_vec));
    return TimeSeries(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                      std::move(y_vec));
}

Eigen::VectorXd json_numbers(const nlohmann::json& arr, const char* key) {
    if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw ParseError(std::string("'") + key + "[" + std::to_string(i) + "]' is not a number");
        }
        out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return out;
}

TimeSeries parse_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("ys")) throw ParseError("JSON series must be an object with 'ys'");
    Eigen::VectorXd ys = json_numbers(doc["ys"], "ys");
    if (doc.contains("xs")) return TimeSeries(json_numbers(doc["xs"], "xs"), std::move(ys));
    if (ys.size() < 2) throw ValidationError("a series needs at least 2 samples");
    return TimeSeries::from_values(std::move(ys));
}

}  // namespace

TimeSeries parse_series(std::string_view text, SeriesFormat format) {
    return format == SeriesFormat::Csv ? parse_csv(text) : parse_json(text);
}

TimeSeries load_series(const std::filesystem::path& path, std::optional<SeriesFormat> format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!format) {
        auto ext = path.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        format = ext == ".json" ? SeriesFormat::Json : SeriesFormat::Csv;
    }
    return parse_series(buf.str(), *format);
}

std::string to_csv(const TimeSeries& series) {
    std::ostringstream out;
    out.precision(17);
    out << "x,y\n";
    for (Eigen::Index i = 0; i < series.size(); ++i) out << series.xs()[i] << ',' << series.ys()[i] << '\n';
    return out.str();
}

}  // namespace entrochart

#include "mfgbroker/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace mfgb {

using nlohmann::ordered_json;

SimConfig RunConfig::sim_config() const {
    SimConfig c(grid());
    c.n_paths = n_paths;
    c.seed = seed;
    c.measure = measure;
    c.record_every = record_every;
    c.n_full_paths = n_full_paths;
    c.N = N;
    c.type_dist = type_distribution();
    return c;
}

TypeDistribution RunConfig::type_distribution() const {
    if (type_kind == "point-mass")
        return TypeDistribution(TypeDistribution::Kind::PointMass, trader_type);
    if (type_kind == "lognormal")
        return TypeDistribution(TypeDistribution::Kind::Lognormal, trader_type,
                                type_log_sd);
    throw std::invalid_argument("unknown type kind: " + type_kind);
}

RunConfig default_config() { return RunConfig{}; }

namespace {

template <class T>
void maybe(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ordered_json j;
    in >> j;

    RunConfig cfg;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        maybe(m, "k_alpha", cfg.model.k_alpha);
        maybe(m, "sigma_alpha", cfg.model.sigma_alpha);
        maybe(m, "sigma_S", cfg.model.sigma_S);
        maybe(m, "b", cfg.model.b);
        maybe(m, "eta_I", cfg.model.eta_I);
        maybe(m, "eta_B", cfg.model.eta_B);
        maybe(m, "a_B", cfg.model.a_B);
        maybe(m, "phi_B", cfg.model.phi_B);
        maybe(m, "a_bar", cfg.model.a_bar);
        maybe(m, "phi_bar", cfg.model.phi_bar);
        maybe(m, "T", cfg.model.T);
        maybe(m, "S0", cfg.model.S0);
        maybe(m, "alpha0", cfg.model.alpha0);
    }
    if (j.contains("grid")) maybe(j.at("grid"), "M", cfg.grid_M);
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        maybe(s, "n_paths", cfg.n_paths);
        maybe(s, "seed", cfg.seed);
        maybe(s, "record_every", cfg.record_every);
        maybe(s, "n_full_paths", cfg.n_full_paths);
        maybe(s, "N", cfg.N);
        if (s.contains("measure"))
            cfg.measure = measure_from_string(s.at("measure").get<std::string>());
    }
    if (j.contains("type")) {
        const auto& t = j.at("type");
        maybe(t, "kind", cfg.type_kind);
        maybe(t, "log_sd", cfg.type_log_sd);
    }
    if (j.contains("trader")) {
        const auto& t = j.at("trader");
        maybe(t, "k_I", cfg.trader_type.k_I);
        maybe(t, "sigma_I", cfg.trader_type.sigma_I);
        maybe(t, "a_I", cfg.trader_type.a_I);
        maybe(t, "phi_I", cfg.trader_type.phi_I);
    }
    maybe(j, "out_dir", cfg.out_dir);
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["model"] = {{"k_alpha", cfg.model.k_alpha},
                  {"sigma_alpha", cfg.model.sigma_alpha},
                  {"sigma_S", cfg.model.sigma_S},
                  {"b", cfg.model.b},
                  {"eta_I", cfg.model.eta_I},
                  {"eta_B", cfg.model.eta_B},
                  {"a_B", cfg.model.a_B},
                  {"phi_B", cfg.model.phi_B},
                  {"a_bar", cfg.model.a_bar},
                  {"phi_bar", cfg.model.phi_bar},
                  {"T", cfg.model.T},
                  {"S0", cfg.model.S0},
                  {"alpha0", cfg.model.alpha0}};
    j["grid"] = {{"M", cfg.grid_M}};
    j["sim"] = {{"n_paths", cfg.n_paths},
                {"seed", cfg.seed},
                {"measure", to_string(cfg.measure)},
                {"record_every", cfg.record_every},
                {"n_full_paths", cfg.n_full_paths},
                {"N", cfg.N}};
    j["type"] = {{"kind", cfg.type_kind}, {"log_sd", cfg.type_log_sd}};
    j["trader"] = {{"k_I", cfg.trader_type.k_I},
                   {"sigma_I", cfg.trader_type.sigma_I},
                   {"a_I", cfg.trader_type.a_I},
                   {"phi_I", cfg.trader_type.phi_I}};
    j["out_dir"] = cfg.out_dir;
    return j.dump(2);
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
    auto num = [&] { return std::stod(value); };
    auto count = [&] {
        return static_cast<std::size_t>(std::stoull(value));
    };

    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    const std::string tail =
        dot == std::string::npos ? std::string{} : key.substr(dot + 1);

    if (head == "out_dir" && tail.empty()) {
        cfg.out_dir = value;
        return;
    }
    if (head == "model") {
        double* slot = nullptr;
        if (tail == "k_alpha") slot = &cfg.model.k_alpha;
        else if (tail == "sigma_alpha") slot = &cfg.model.sigma_alpha;
        else if (tail == "sigma_S") slot = &cfg.model.sigma_S;
        else if (tail == "b") slot = &cfg.model.b;
        else if (tail == "eta_I") slot = &cfg.model.eta_I;
        else if (tail == "eta_B") slot = &cfg.model.eta_B;
        else if (tail == "a_B") slot = &cfg.model.a_B;
        else if (tail == "phi_B") slot = &cfg.model.phi_B;
        else if (tail == "a_bar") slot = &cfg.model.a_bar;
        else if (tail == "phi_bar") slot = &cfg.model.phi_bar;
        else if (tail == "T") slot = &cfg.model.T;
        else if (tail == "S0") slot = &cfg.model.S0;
        else if (tail == "alpha0") slot = &cfg.model.alpha0;
        if (slot) {
            *slot = num();
            return;
        }
    } else if (head == "grid") {
        if (tail == "M") {
            cfg.grid_M = count();
            return;
        }
    } else if (head == "sim") {
        if (tail == "n_paths") { cfg.n_paths = count(); return; }
        if (tail == "seed") { cfg.seed = std::stoull(value); return; }
        if (tail == "record_every") { cfg.record_every = count(); return; }
        if (tail == "n_full_paths") { cfg.n_full_paths = count(); return; }
        if (tail == "N") { cfg.N = count(); return; }
        if (tail == "measure") {
            cfg.measure = measure_from_string(value);
            return;
        }
    } else if (head == "type") {
        if (tail == "kind") { cfg.type_kind = value; return; }
        if (tail == "log_sd") { cfg.type_log_sd = num(); return; }
    } else if (head == "trader") {
        if (tail == "k_I") { cfg.trader_type.k_I = num(); return; }
        if (tail == "sigma_I") { cfg.trader_type.sigma_I = num(); return; }
        if (tail == "a_I") { cfg.trader_type.a_I = num(); return; }
        if (tail == "phi_I") { cfg.trader_type.phi_I = num(); return; }
    }
    throw std::invalid_argument("unknown configuration key: " + key);
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(h));
    return out;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    ordered_json j;
    j["config"] = m.config_json.empty()
                      ? ordered_json::object()
                      : ordered_json::parse(m.config_json);
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    ordered_json stages = ordered_json::object();
    for (const auto& [name, seconds] : m.stage_seconds) stages[name] = seconds;
    j["stage_seconds"] = stages;
    ordered_json files = ordered_json::array();
    for (const auto& e : m.files)
        files.push_back({{"file", e.file}, {"hash", e.hash}});
    j["files"] = files;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

void write_stats_csv(const EnsembleStats& stats, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,column,mean,sd,se\n";
    for (const auto& [name, col] : stats.columns) {
        for (std::size_t i = 0; i < stats.t.size(); ++i) {
            out << g17(stats.t[i]) << ',' << name << ',' << g17(col.mean[i])
                << ',' << g17(col.sd[i]) << ',' << g17(col.se[i]) << '\n';
        }
    }
}

void write_paths_csv(const PathEnsemble& ensemble, const TimeGrid& grid,
                     const std::string& path) {
    std::ofstream out = open_out(path);
    out << "path_id,t,column,value\n";
    for (const PathRecord& rec : ensemble.sample_paths) {
        const std::vector<std::pair<const char*, const std::vector<double>*>>
            cols = {{"alpha", &rec.signals.alpha},
                    {"alpha_I", &rec.signals.alpha_I},
                    {"nu_bar", &rec.states.nu_bar},
                    {"nu_B", &rec.states.nu_B},
                    {"nu_I", &rec.states.nu_I},
                    {"Q_bar", &rec.states.Q_bar},
                    {"Q_barB", &rec.states.Q_barB},
                    {"Q_I", &rec.states.Q_I},
                    {"S", &rec.S},
                    {"X_I", &rec.X_I},
                    {"X_barB", &rec.X_barB}};
        for (const auto& [name, values] : cols) {
            for (std::size_t k = 0; k < values->size(); ++k) {
                out << rec.path_id << ',' << g17(grid.t(k)) << ',' << name
                    << ',' << g17((*values)[k]) << '\n';
            }
        }
    }
}

void write_check_reports_json(const std::vector<CheckReport>& reports,
                              const std::string& path) {
    ordered_json arr = ordered_json::array();
    for (const CheckReport& r : reports) {
        arr.push_back({{"name", r.name},
                       {"statistic", r.statistic},
                       {"tolerance", r.tolerance},
                       {"pass", r.pass},
                       {"negative_control", r.negative_control()},
                       {"diagnostics", r.diagnostics}});
    }
    std::ofstream out = open_out(path);
    out << arr.dump(2) << "\n";
}

namespace {

constexpr int kPanelW = 480, kPanelH = 340;
constexpr int kMarginL = 62, kMarginR = 16, kMarginT = 34, kMarginB = 34;
constexpr std::size_t kMaxPoints = 1200;  // decimation bound per series

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                   "#bcbd22", "#17becf"};
    return colors[i % 10];
}

std::string f3(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

void render_panel(std::ostream& out, const SvgPanel& panel, int x0, int y0) {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const SvgSeries& s : panel.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    const double pw = kPanelW - kMarginL - kMarginR;
    const double ph = kPanelH - kMarginT - kMarginB;
    auto px = [&](double x) {
        return x0 + kMarginL + pw * (x - xmin) / (xmax - xmin);
    };
    auto py = [&](double y) {
        return y0 + kMarginT + ph * (1.0 - (y - ymin) / (ymax - ymin));
    };

    out << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << y0 + 20
        << "\" text-anchor=\"middle\" font-size=\"14\">" << panel.title
        << "</text>\n";
    out << "<rect x=\"" << x0 + kMarginL << "\" y=\"" << y0 + kMarginT
        << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    // axis labels: extremes only
    out << "<text x=\"" << x0 + kMarginL << "\" y=\"" << y0 + kPanelH - 12
        << "\" font-size=\"10\">" << f3(xmin) << "</text>\n";
    out << "<text x=\"" << x0 + kPanelW - kMarginR << "\" y=\""
        << y0 + kPanelH - 12 << "\" text-anchor=\"end\" font-size=\"10\">"
        << f3(xmax) << "</text>\n";
    out << "<text x=\"" << x0 + kMarginL - 4 << "\" y=\"" << y0 + kMarginT + 8
        << "\" text-anchor=\"end\" font-size=\"10\">" << f3(ymax)
        << "</text>\n";
    out << "<text x=\"" << x0 + kMarginL - 4 << "\" y=\""
        << y0 + kMarginT + ph << "\" text-anchor=\"end\" font-size=\"10\">"
        << f3(ymin) << "</text>\n";
    if (ymin < 0.0 && ymax > 0.0) {
        out << "<line x1=\"" << x0 + kMarginL << "\" y1=\"" << py(0.0)
            << "\" x2=\"" << x0 + kMarginL + pw << "\" y2=\"" << py(0.0)
            << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
        const SvgSeries& s = panel.series[si];
        const char* color = s.color.empty() ? palette(si) : s.color.c_str();
        const std::size_t n = s.x.size();
        const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < n; i += stride) {
            out << f3(px(s.x[i])) << ',' << f3(py(s.y[i])) << ' ';
        }
        if (n > 0 && (n - 1) % stride != 0)
            out << f3(px(s.x[n - 1])) << ',' << f3(py(s.y[n - 1]));
        out << "\"/>\n";
        if (!s.label.empty()) {
            out << "<text x=\"" << x0 + kMarginL + 6 << "\" y=\""
                << y0 + kMarginT + 14 + 13 * static_cast<int>(si)
                << "\" font-size=\"11\" fill=\"" << color << "\">" << s.label
                << "</text>\n";
        }
    }
}

}  // namespace

void write_svg_grid(const std::vector<SvgPanel>& panels, int cols,
                    const std::string& path) {
    if (cols < 1) throw std::invalid_argument("write_svg_grid: cols >= 1");
    const int rows =
        (static_cast<int>(panels.size()) + cols - 1) / std::max(cols, 1);
    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << cols * kPanelW << "\" height=\"" << rows * kPanelH
        << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const int c = static_cast<int>(i) % cols;
        const int r = static_cast<int>(i) / cols;
        render_panel(out, panels[i], c * kPanelW, r * kPanelH);
    }
    out << "</svg>\n";
}

namespace {

std::vector<double> node_times(const TimeGrid& grid, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = grid.t(k);
    return t;
}

SvgSeries series(const std::string& label, std::vector<double> x,
                 const std::vector<double>& y) {
    return SvgSeries{label, {}, std::move(x), y};
}

SvgSeries tail_series(const std::string& label, const TimeGrid& grid,
                      const std::vector<double>& y, double from) {
    SvgSeries s{label, {}, {}, {}};
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (grid.t(k) < from) continue;
        s.x.push_back(grid.t(k));
        s.y.push_back(y[k]);
    }
    return s;
}

}  // namespace

void write_figure1(const PathEnsemble& ensemble, const TimeGrid& grid,
                   const std::string& path) {
    if (ensemble.sample_paths.empty())
        throw std::invalid_argument("write_figure1: no sample paths");
    const PathRecord& r = ensemble.sample_paths.front();
    const std::vector<double> t = node_times(grid, grid.nodes());
    std::vector<SvgPanel> panels = {
        {"signals",
         {series("alpha", t, r.signals.alpha),
          series("alpha_I", t, r.signals.alpha_I)}},
        {"trading speeds",
         {series("nu_bar", t, r.states.nu_bar),
          series("nu_B", t, r.states.nu_B),
          series("nu_I", t, r.states.nu_I)}},
        {"inventories",
         {series("Q_bar", t, r.states.Q_bar),
          series("Q_barB", t, r.states.Q_barB),
          series("Q_I", t, r.states.Q_I)}},
        {"price", {series("S", t, r.S)}},
    };
    write_svg_grid(panels, 2, path);
}

void write_figure2(const MeanFieldCoefficients& mf, const std::string& path) {
    const TimeGrid& grid = mf.grid;
    const std::vector<double> t = node_times(grid, grid.nodes());
    const double from = grid.horizon() * 0.95;
    std::vector<SvgPanel> panels = {
        {"signal loadings",
         {series("g_a", t, mf.g_a.values), series("h_a", t, mf.h_a.values)}},
        {"inventory loadings",
         {series("g_b", t, mf.g_b.values), series("g_c", t, mf.g_c.values),
          series("h_b", t, mf.h_b.values), series("h_c", t, mf.h_c.values)}},
        {"externalisation rate q_a", {series("q_a", t, mf.q_a.values)}},
        {"inventory loadings, terminal zoom",
         {tail_series("g_b", grid, mf.g_b.values, from),
          tail_series("g_c", grid, mf.g_c.values, from),
          tail_series("h_b", grid, mf.h_b.values, from),
          tail_series("h_c", grid, mf.h_c.values, from)}},
    };
    write_svg_grid(panels, 2, path);
}

void write_figure3(const TraderCoefficients& tc, const std::string& path) {
    const TimeGrid& grid = tc.grid;
    const std::vector<double> t = node_times(grid, grid.nodes());
    const double from = grid.horizon() * 0.95;
    std::vector<SvgPanel> panels = {
        {"signal loadings",
         {series("f_a", t, tc.f_a.values), series("f_aI", t, tc.f_aI.values)}},
        {"inventory loadings",
         {series("f_b", t, tc.f_b.values), series("f_bI", t, tc.f_bI.values),
          series("f_c", t, tc.f_c.values)}},
        {"own-inventory loading, terminal zoom",
         {tail_series("f_bI", grid, tc.f_bI.values, from)}},
    };
    write_svg_grid(panels, 2, path);
}

void write_figure4(const PathEnsemble& ensemble, const TimeGrid& grid,
                   const std::string& path) {
    if (ensemble.sample_paths.empty())
        throw std::invalid_argument("write_figure4: no sample paths");
    const std::vector<double> t = node_times(grid, grid.nodes());
    SvgPanel nuI{"trader speed across paths", {}};
    SvgPanel QI{"trader inventory across paths", {}};
    SvgPanel nuB{"broker speed across paths", {}};
    SvgPanel QB{"broker inventory across paths", {}};
    for (const PathRecord& r : ensemble.sample_paths) {
        const std::string id = std::to_string(r.path_id);
        nuI.series.push_back(series(id, t, r.states.nu_I));
        QI.series.push_back(series(id, t, r.states.Q_I));
        nuB.series.push_back(series(id, t, r.states.nu_B));
        QB.series.push_back(series(id, t, r.states.Q_barB));
    }
    write_svg_grid({nuI, QI, nuB, QB}, 2, path);
}

}  // namespace mfgb

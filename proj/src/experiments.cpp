#include "seqlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace seqlab {

using nlohmann::json;

ExperimentScale desk_scale() { return ExperimentScale{}; }

ExperimentScale paper_scale() {
    ExperimentScale s;
    s.name = "paper";
    s.windows_per_kind = 4000;
    s.train_windows = 8000;
    s.epochs = 50;
    s.trials = 1000;
    s.ratio_fracs = {1.0 / 10, 1.0 / 5, 1.0 / 4, 1.0 / 3, 1.0 / 2,
                     2.0 / 3,  3.0 / 4, 4.0 / 5, 9.0 / 10};
    return s;
}

namespace {

json signal_to_json(const SignalConfig& c) {
    return json{{"kind", to_string(c.kind)},
                {"noise", c.noise},
                {"offset", c.offset},
                {"amplitude", c.amplitude},
                {"period", c.period},
                {"mod_depth", c.mod_depth},
                {"mod_period", c.mod_period},
                {"rise", c.rise},
                {"top", c.top},
                {"fall", c.fall},
                {"rest", c.rest},
                {"dt", c.dt},
                {"count", c.count},
                {"seed", c.seed}};
}

SignalConfig signal_from_json(const json& j) {
    SignalConfig c;
    c.kind = signal_kind_from_string(j.at("kind").get<std::string>());
    c.noise = j.at("noise");
    c.offset = j.at("offset");
    c.amplitude = j.at("amplitude");
    c.period = j.at("period");
    c.mod_depth = j.at("mod_depth");
    c.mod_period = j.at("mod_period");
    c.rise = j.at("rise");
    c.top = j.at("top");
    c.fall = j.at("fall");
    c.rest = j.at("rest");
    c.dt = j.at("dt");
    c.count = j.at("count");
    c.seed = j.at("seed");
    return c;
}

json train_to_json(const TrainConfig& t) {
    return json{{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"epsilon", t.epsilon},
                {"validation_fraction", t.validation_fraction},
                {"seed", t.seed},
                {"shuffle", t.shuffle},
                {"clip_norm", t.clip_norm}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.epochs = j.at("epochs");
    t.batch_size = j.at("batch_size");
    t.learning_rate = j.at("learning_rate");
    t.beta1 = j.at("beta1");
    t.beta2 = j.at("beta2");
    t.epsilon = j.at("epsilon");
    t.validation_fraction = j.at("validation_fraction");
    t.seed = j.at("seed");
    t.shuffle = j.at("shuffle");
    t.clip_norm = j.at("clip_norm");
    return t;
}

json scale_to_json(const ExperimentScale& s) {
    return json{{"name", s.name},
                {"windows_per_kind", s.windows_per_kind},
                {"train_windows", s.train_windows},
                {"epochs", s.epochs},
                {"trials", s.trials},
                {"ratio_fracs", s.ratio_fracs}};
}

ExperimentScale scale_from_json(const json& j) {
    ExperimentScale s;
    s.name = j.at("name");
    s.windows_per_kind = j.at("windows_per_kind");
    s.train_windows = j.at("train_windows");
    s.epochs = j.at("epochs");
    s.trials = j.at("trials");
    s.ratio_fracs = j.at("ratio_fracs").get<std::vector<double>>();
    return s;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
    json signals = json::array();
    for (SignalKind kind : config.signals) signals.push_back(to_string(kind));
    json j{{"sine", signal_to_json(config.sine)},
           {"trapezoid", signal_to_json(config.trapezoid)},
           {"m", config.m},
           {"k", config.k},
           {"kp_values", config.kp_values},
           {"n_grid", config.n_grid},
           {"n", config.n},
           {"n1", config.n1},
           {"signals", signals},
           {"train", train_to_json(config.train)},
           {"scale", scale_to_json(config.scale)},
           {"seed", config.seed},
           {"out_dir", config.out_dir}};
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    if (j.contains("sine")) c.sine = signal_from_json(j.at("sine"));
    if (j.contains("trapezoid")) c.trapezoid = signal_from_json(j.at("trapezoid"));
    if (j.contains("m")) c.m = j.at("m");
    if (j.contains("k")) c.k = j.at("k");
    if (j.contains("kp_values")) c.kp_values = j.at("kp_values").get<std::vector<std::size_t>>();
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("n")) c.n = j.at("n");
    if (j.contains("n1")) c.n1 = j.at("n1");
    if (j.contains("signals")) {
        c.signals.clear();
        for (const auto& s : j.at("signals"))
            c.signals.push_back(signal_kind_from_string(s.get<std::string>()));
    }
    if (j.contains("train")) c.train = train_from_json(j.at("train"));
    if (j.contains("scale")) c.scale = scale_from_json(j.at("scale"));
    if (j.contains("seed")) c.seed = j.at("seed");
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir");
    return c;
}

std::vector<std::size_t> ratio_grid(std::size_t n, const std::vector<double>& fracs) {
    if (n < 2) throw std::invalid_argument("ratio_grid: n must be >= 2");
    std::vector<std::size_t> grid;
    for (double f : fracs) {
        auto n1 = std::size_t(std::llround(f * double(n)));
        n1 = std::clamp<std::size_t>(n1, 1, n - 1);
        grid.push_back(n1);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

Dataset cell_dataset(const ExperimentConfig& config, SignalKind kind) {
    Rng series_rng(derive_seed(config.seed, "train/series/" + to_string(kind)));
    Series series = gen_series(config.signal(kind), series_rng);
    Rng win_rng(derive_seed(config.seed, "train/windows/" + to_string(kind)));
    Dataset ds;
    ds.samples = make_windows(series, config.m, config.k, config.scale.train_windows, win_rng);
    return ds;
}

Series eval_series(const ExperimentConfig& config, SignalKind kind, std::size_t kp_max) {
    SignalConfig sc = config.signal(kind);
    if (sc.count < config.m + kp_max)
        throw std::invalid_argument("eval_series: series too short for m + kp");
    Rng rng(derive_seed(config.seed, "eval/series/" + to_string(kind)));
    return gen_series(sc, rng);
}

namespace {

TrainConfig cell_train_config(const ExperimentConfig& config, const std::string& tag) {
    TrainConfig tc = config.train;
    tc.epochs = config.scale.epochs;
    tc.seed = derive_seed(config.seed, "train/" + tag);
    return tc;
}

}  // namespace

Seq2SeqModel train_seq2seq_cell(const ExperimentConfig& config, SignalKind kind,
                                std::size_t n, std::size_t n1, const Dataset& dataset,
                                TrainHistory* history) {
    if (n1 < 1 || n1 >= n)
        throw std::invalid_argument("train_seq2seq_cell: need 1 <= n1 <= n-1");
    const std::string tag = "seq2seq/" + to_string(kind) + "/n" + std::to_string(n) +
                            "/n1_" + std::to_string(n1);
    Rng init_rng(derive_seed(config.seed, "init/" + tag));
    Seq2SeqModel model = init_seq2seq({1, n1, n - n1, config.m, config.k}, init_rng);
    TrainHistory h = train(model, dataset, cell_train_config(config, tag));
    if (history) *history = std::move(h);
    return model;
}

MlModel train_ml_cell(const ExperimentConfig& config, SignalKind kind, std::size_t n,
                      const Dataset& dataset, TrainHistory* history) {
    const std::string tag = "ml/" + to_string(kind) + "/n" + std::to_string(n);
    Rng init_rng(derive_seed(config.seed, "init/" + tag));
    MlModel model = init_ml({1, n, config.m, config.k}, init_rng);
    TrainHistory h = train(model, dataset, cell_train_config(config, tag));
    if (history) *history = std::move(h);
    return model;
}

PredictFn traditional_engine(const Seq2SeqModel& model, std::size_t k) {
    return [model, k](const std::vector<Vec>& input, std::size_t horizon) {
        if (horizon % k != 0)
            throw std::invalid_argument("traditional engine: horizon must be a multiple of k");
        return predict_traditional_rounds(model, input, k, horizon / k);
    };
}

PredictFn ml_engine(const MlModel& model) {
    return [model](const std::vector<Vec>& input, std::size_t horizon) {
        return ml_rollout(model, input, horizon);
    };
}

EvalReport evaluate_engine(const ExperimentConfig& config, const PredictFn& engine,
                           const Series& series, std::size_t kp,
                           const std::string& rng_tag) {
    Rng rng(derive_seed(config.seed, "eval/windows/" + rng_tag));
    // eval_Ep takes (k, p); drive it as p groups of k
    const std::size_t k = config.k;
    if (kp % k != 0) throw std::invalid_argument("evaluate_engine: kp must be a multiple of k");
    return eval_Ep(engine, series, config.m, k, kp / k, config.scale.trials, rng);
}

namespace {

SweepRow make_row(const std::string& experiment, SignalKind kind, std::size_t n,
                  std::size_t n1, std::size_t kp, const EvalReport& report,
                  std::uint64_t seed) {
    SweepRow row;
    row.experiment = experiment;
    row.kind = kind;
    row.n = n;
    row.n1 = n1;
    row.n2 = n1 > 0 ? n - n1 : 0;
    if (n1 > 0) {
        row.r = double(n1) / double(row.n2);
        row.ln_r = std::log(row.r);
    } else {
        row.r = std::numeric_limits<double>::quiet_NaN();
        row.ln_r = std::numeric_limits<double>::quiet_NaN();
    }
    row.kp = kp;
    row.mean_e = report.mean;
    row.std_e = report.stddev;
    row.seed = seed;
    return row;
}

}  // namespace

std::vector<SweepRow> run_ratio_sweep(const ExperimentConfig& config,
                                      const std::string& experiment_id) {
    std::size_t kp_max = 0;
    for (std::size_t kp : config.kp_values) kp_max = std::max(kp_max, kp);
    std::vector<SweepRow> rows;
    for (SignalKind kind : config.signals) {
        Dataset dataset = cell_dataset(config, kind);
        Series series = eval_series(config, kind, kp_max);
        for (std::size_t n : config.n_grid) {
            for (std::size_t n1 : ratio_grid(n, config.scale.ratio_fracs)) {
                Seq2SeqModel model = train_seq2seq_cell(config, kind, n, n1, dataset);
                PredictFn engine = traditional_engine(model, config.k);
                for (std::size_t kp : config.kp_values) {
                    const std::string tag = to_string(kind) + "/n" + std::to_string(n) +
                                            "/n1_" + std::to_string(n1) + "/kp" +
                                            std::to_string(kp);
                    EvalReport report = evaluate_engine(config, engine, series, kp, tag);
                    rows.push_back(
                        make_row(experiment_id, kind, n, n1, kp, report, config.seed));
                }
            }
        }
    }
    return rows;
}

std::vector<SweepRow> run_compare_ml(const ExperimentConfig& config) {
    std::size_t kp_max = 0;
    for (std::size_t kp : config.kp_values) kp_max = std::max(kp_max, kp);
    const std::size_t n = config.n;
    std::vector<SweepRow> rows;
    for (SignalKind kind : config.signals) {
        Dataset dataset = cell_dataset(config, kind);
        Series series = eval_series(config, kind, kp_max);
        for (std::size_t n1 : ratio_grid(n, config.scale.ratio_fracs)) {
            Seq2SeqModel model = train_seq2seq_cell(config, kind, n, n1, dataset);
            PredictFn engine = traditional_engine(model, config.k);
            for (std::size_t kp : config.kp_values) {
                const std::string tag = to_string(kind) + "/n" + std::to_string(n) +
                                        "/n1_" + std::to_string(n1) + "/kp" +
                                        std::to_string(kp);
                EvalReport report = evaluate_engine(config, engine, series, kp, tag);
                rows.push_back(make_row("compare-ml", kind, n, n1, kp, report, config.seed));
            }
        }
        MlModel ml = train_ml_cell(config, kind, n, dataset);
        PredictFn engine = ml_engine(ml);
        for (std::size_t kp : config.kp_values) {
            const std::string tag =
                to_string(kind) + "/ml/n" + std::to_string(n) + "/kp" + std::to_string(kp);
            EvalReport report = evaluate_engine(config, engine, series, kp, tag);
            rows.push_back(make_row("compare-ml", kind, n, 0, kp, report, config.seed));
        }
    }
    return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "experiment,signal,n,n1,n2,r,ln_r,kp,mean_e,std_e,seed\n";
    for (const SweepRow& row : rows) {
        out << row.experiment << ',' << to_string(row.kind) << ',' << row.n << ',';
        if (row.n1 > 0) {
            out << row.n1 << ',' << row.n2 << ',' << format_double(row.r) << ','
                << format_double(row.ln_r);
        } else {
            out << ",,,";  // ML rows carry no encoder/decoder split
        }
        out << ',' << row.kp << ',' << format_double(row.mean_e) << ','
            << format_double(row.std_e) << ',' << row.seed << '\n';
    }
}

void save_line_chart_svg(const std::vector<SvgSeries>& series, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::string& path) {
    const double width = 640, height = 420, margin = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };
    static const char* colors[] = {"#2e7d32", "#1565c0", "#c62828", "#6a1b9a",
                                   "#ef6c00", "#00838f", "#4e342e", "#000000"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label << "</text>\n";
    svg << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 18 " << height / 2 << ")\">" << y_label
        << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = colors[i % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[i].points) svg << px(x) << ',' << py(y) << ' ';
        svg << "\"/>\n";
        svg << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16.0 * double(i)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
            << series[i].label << "</text>\n";
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

void ensure_dir(const std::string& path) {
    std::filesystem::create_directories(path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

namespace {

void echo_config(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    write_text_file(config.out_dir + "/config.json", config_to_json(config));
}

std::vector<SvgSeries> sweep_chart_series(const std::vector<SweepRow>& rows, bool by_n1) {
    // group by (signal, n, kp); ML rows (n1 == 0) are flat reference lines
    std::map<std::string, SvgSeries> groups;
    double xmin = 1e300, xmax = -1e300;
    for (const SweepRow& row : rows) {
        if (row.n1 == 0) continue;
        const double x = by_n1 ? double(row.n1) : row.ln_r;
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        std::string key = to_string(row.kind) + " n=" + std::to_string(row.n) +
                          " kp=" + std::to_string(row.kp);
        groups[key].label = key;
        groups[key].points.emplace_back(x, row.mean_e);
    }
    for (const SweepRow& row : rows) {
        if (row.n1 != 0) continue;
        std::string key = to_string(row.kind) + " ML n=" + std::to_string(row.n) +
                          " kp=" + std::to_string(row.kp);
        groups[key].label = key;
        groups[key].points.emplace_back(xmin, row.mean_e);
        groups[key].points.emplace_back(xmax, row.mean_e);
    }
    std::vector<SvgSeries> out;
    for (auto& [key, s] : groups) {
        std::sort(s.points.begin(), s.points.end());
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& config) {
    echo_config(config);
    Rng sine_rng(derive_seed(config.seed, "series/sine"));
    Rng trap_rng(derive_seed(config.seed, "series/trapezoid"));
    Series sine = gen_sine(config.sine, sine_rng);
    Series trap = gen_trapezoid(config.trapezoid, trap_rng);
    save_series_csv(sine, config.out_dir + "/series_sine.csv");
    save_series_csv(trap, config.out_dir + "/series_trapezoid.csv");
    Dataset ds = build_dataset(config.seed, config.m, config.k,
                               config.scale.windows_per_kind, config.sine,
                               config.trapezoid);
    save_dataset_jsonl(ds, config.out_dir + "/dataset.jsonl");
}

void cmd_train(const ExperimentConfig& config, const std::string& arch,
               const std::string& dataset_path) {
    echo_config(config);
    Dataset ds;
    if (!dataset_path.empty()) {
        ds = load_dataset_jsonl(dataset_path);
    } else {
        ds = build_dataset(config.seed, config.m, config.k,
                           config.scale.train_windows / 2, config.sine,
                           config.trapezoid);
    }
    if (ds.samples.empty()) throw std::runtime_error("train: dataset is empty");
    TrainConfig tc = config.train;
    tc.epochs = config.scale.epochs;
    tc.seed = derive_seed(config.seed, "train/cli/" + arch);
    TrainHistory history;
    if (arch == "seq2seq") {
        const std::size_t n1 = config.n1 > 0 ? config.n1 : config.n / 2;
        Rng init_rng(derive_seed(config.seed, "init/cli/seq2seq"));
        Seq2SeqModel model =
            init_seq2seq({1, n1, config.n - n1, config.m, config.k}, init_rng);
        history = train(model, ds, tc);
        save_model(model, config.out_dir + "/model_seq2seq.json");
    } else if (arch == "ml") {
        Rng init_rng(derive_seed(config.seed, "init/cli/ml"));
        MlModel model = init_ml({1, config.n, config.m, config.k}, init_rng);
        history = train(model, ds, tc);
        save_model(model, config.out_dir + "/model_ml.json");
    } else {
        throw std::invalid_argument("train: arch must be seq2seq or ml");
    }
    save_history_csv(history, config.out_dir + "/history_" + arch + ".csv");
}

void cmd_sweep_ratio(const ExperimentConfig& config) {
    echo_config(config);
    std::vector<SweepRow> rows = run_ratio_sweep(config, "sweep-ratio");
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.kind, a.n, a.n1, a.kp) < std::tie(b.kind, b.n, b.n1, b.kp);
    });
    save_sweep_csv(rows, config.out_dir + "/sweep_ratio.csv");
    save_line_chart_svg(sweep_chart_series(rows, false), "error vs ln r", "ln r", "E",
                        config.out_dir + "/sweep_ratio.svg");
}

void cmd_sweep_n1(const ExperimentConfig& config) {
    echo_config(config);
    std::vector<SweepRow> rows = run_ratio_sweep(config, "sweep-n1");
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.n1, a.kind, a.n, a.kp) < std::tie(b.n1, b.kind, b.n, b.kp);
    });
    save_sweep_csv(rows, config.out_dir + "/sweep_n1.csv");
    save_line_chart_svg(sweep_chart_series(rows, true), "error vs n1", "n1", "E",
                        config.out_dir + "/sweep_n1.svg");
}

void cmd_compare_ml(const ExperimentConfig& config) {
    echo_config(config);
    std::vector<SweepRow> rows = run_compare_ml(config);
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.kind, a.n1, a.kp) < std::tie(b.kind, b.n1, b.kp);
    });
    save_sweep_csv(rows, config.out_dir + "/compare_ml.csv");
    save_line_chart_svg(sweep_chart_series(rows, false), "traditional vs ML", "ln r",
                        "E", config.out_dir + "/compare_ml.svg");
}

void cmd_trajectories(const ExperimentConfig& config) {
    echo_config(config);
    const std::size_t kp = 40;
    const std::size_t n = config.n;
    // r = 4 and r = 1/4 splits of the budget
    const std::size_t n1_big = std::size_t(std::llround(double(n) * 4.0 / 5.0));
    const std::size_t n1_small = std::size_t(std::llround(double(n) / 5.0));
    for (SignalKind kind : config.signals) {
        Dataset dataset = cell_dataset(config, kind);
        Series series = eval_series(config, kind, kp);
        MlModel ml = train_ml_cell(config, kind, n, dataset);
        Seq2SeqModel trad_big = train_seq2seq_cell(config, kind, n, n1_big, dataset);
        Seq2SeqModel trad_small = train_seq2seq_cell(config, kind, n, n1_small, dataset);

        Rng rng(derive_seed(config.seed, "trajectories/" + to_string(kind)));
        const std::size_t pmax = series.values.size() - config.m - kp + 1;
        const std::size_t start = std::size_t(rng.uniform_int(1, pmax));
        std::vector<Vec> input;
        for (std::size_t i = 0; i < config.m; ++i)
            input.push_back({series.values[start - 1 + i]});
        std::vector<Vec> ml_pred = ml_rollout(ml, input, kp);
        std::vector<Vec> trad_big_pred =
            predict_traditional_rounds(trad_big, input, config.k, kp / config.k);
        std::vector<Vec> trad_small_pred =
            predict_traditional_rounds(trad_small, input, config.k, kp / config.k);

        std::ofstream out(config.out_dir + "/trajectory_" + to_string(kind) + ".csv",
                          std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trajectory csv");
        out << "t,truth,ml,traditional_r4,traditional_r025\n";
        for (std::size_t i = 0; i < config.m + kp; ++i) {
            const double t = double(start + i) * series.config.dt;
            out << format_double(t) << ',' << format_double(series.values[start - 1 + i]);
            if (i >= config.m) {
                const std::size_t j = i - config.m;
                out << ',' << format_double(ml_pred[j][0]) << ','
                    << format_double(trad_big_pred[j][0]) << ','
                    << format_double(trad_small_pred[j][0]);
            } else {
                out << ",,,";
            }
            out << '\n';
        }
    }
}

void cmd_consistency(const ExperimentConfig& config, const std::string& model_path,
                     bool tune, std::size_t tune_steps, std::size_t harvest_limit) {
    echo_config(config);
    Seq2SeqModel model = load_seq2seq(model_path);
    Dataset ds = build_dataset(config.seed, model.dims.m, model.dims.k,
                               config.scale.train_windows / 2, config.sine,
                               config.trapezoid);
    HiddenStateSet states = harvest_states(model, ds, harvest_limit);
    ConsistencyReport before = consistency_stats(model, states);
    save_consistency_csv(before, config.out_dir + "/consistency_before.csv");
    write_text_file(config.out_dir + "/consistency_before.json",
                    consistency_summary_json(before));
    if (!tune) return;

    Series series = eval_series(config, config.signals.front(), model.dims.k);
    PredictFn engine = traditional_engine(model, model.dims.k);
    EvalReport ep_before =
        evaluate_engine(config, engine, series, model.dims.k, "consistency/before");

    TrainConfig tc = config.train;
    TuneResult tuned = tune_decoder(model, states, tune_steps, tc);
    ConsistencyReport after = consistency_stats(model, states);
    save_consistency_csv(after, config.out_dir + "/consistency_after.csv");
    write_text_file(config.out_dir + "/consistency_after.json",
                    consistency_summary_json(after));
    save_model(model, config.out_dir + "/model_tuned.json");

    PredictFn engine_after = traditional_engine(model, model.dims.k);
    EvalReport ep_after =
        evaluate_engine(config, engine_after, series, model.dims.k, "consistency/before");

    std::ofstream hist(config.out_dir + "/tune_history.csv", std::ios::binary);
    hist << "step,objective\n";
    for (std::size_t i = 0; i < tuned.objective_history.size(); ++i)
        hist << i << ',' << format_double(tuned.objective_history[i]) << '\n';

    json summary{{"ep_before_mean", ep_before.mean},
                 {"ep_after_mean", ep_after.mean},
                 {"residual_mean_before", before.mean},
                 {"residual_mean_after", after.mean},
                 {"residual_median_before", before.median},
                 {"residual_median_after", after.median}};
    write_text_file(config.out_dir + "/tune_summary.json", summary.dump(2));
}

double cmd_grad_check(const ExperimentConfig& config, std::size_t models_per_arch) {
    double worst = 0.0;
    const std::size_t m = 4, k = 3;
    for (std::size_t i = 0; i < models_per_arch; ++i) {
        Rng rng(derive_seed(config.seed, "gradcheck/" + std::to_string(i)));
        Seq2SeqModel s2s = init_seq2seq({1, 3, 2, m, k}, rng);
        MlModel ml = init_ml({1, 3, m, k}, rng);
        Sample sample;
        for (std::size_t j = 0; j < m; ++j) sample.input.push_back({rng.uniform(-1, 1)});
        for (std::size_t j = 0; j < k; ++j) sample.target.push_back({rng.uniform(-1, 1)});
        worst = std::max(worst, grad_check(s2s, sample, 1e-5));
        worst = std::max(worst, grad_check(ml, sample, 1e-5));
    }
    return worst;
}

}  // namespace seqlab

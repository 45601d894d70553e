#pragma once

// Disorder-averaged sweeps over the (epsilon, W) plane and their CSV output.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"
#include "qwalk/evolve.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/version.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

struct SweepPlan {
    std::vector<double> epsilons{1.0};
    std::vector<double> widths{0.0};
    DisorderModel model = DisorderModel::none;
    int instances = 20;
    std::uint64_t base_seed = 0;
    std::int64_t t_max = 8192;
    Spinor psi_ic = Spinor::symmetric();
    std::optional<TimeWindow> window;  ///< defaults to default_window(t_max)
    int samples_per_octave = 2;
    double threshold = kLocalizationThreshold;
    double budget = 0x1p42;  ///< cap on instances * t_max^2 summed over cells

    TimeWindow fit_window() const { return window.value_or(default_window(t_max)); }
    std::uint64_t instance_seed(int instance) const {
        return base_seed + static_cast<std::uint64_t>(instance);
    }
    std::size_t cell_count() const { return epsilons.size() * widths.size(); }
    double estimated_updates() const {
        return static_cast<double>(cell_count()) * instances * static_cast<double>(t_max) *
               static_cast<double>(t_max);
    }
};

inline void validate(const SweepPlan& plan) {
    detail::require(!plan.epsilons.empty() && !plan.widths.empty(), "plan: empty epsilon or W list");
    for (double e : plan.epsilons) detail::require(e > 0.0 && e <= 1.0, "plan: epsilon must lie in (0, 1]");
    for (double w : plan.widths) detail::require(w >= 0.0 && w <= std::numbers::pi, "plan: W must lie in [0, pi]");
    detail::require(plan.instances >= 1, "plan: need at least one instance");
    detail::require(plan.t_max >= 16 && std::has_single_bit(static_cast<std::uint64_t>(plan.t_max)),
                    "plan: t_max must be a power of two >= 16");
    detail::require(std::abs(plan.psi_ic.norm_squared() - 1.0) < 1e-12, "plan: psi_ic must be normalized");
    detail::require(plan.samples_per_octave >= 1, "plan: samples_per_octave must be >= 1");
    const TimeWindow w = plan.fit_window();
    detail::require(w.lo >= 2 && w.lo < w.hi && w.hi <= plan.t_max, "plan: invalid fit window");
    if (plan.estimated_updates() > plan.budget) {
        std::ostringstream msg;
        msg << "plan needs ~" << plan.estimated_updates() << " amplitude updates (instances * t_max^2 per cell), "
            << "above the budget of " << plan.budget;
        throw budget_error(msg.str());
    }
}

struct InstanceResult {
    int instance = 0;
    SigmaSeries series;
    FitResult fit;
};

/// Aggregate of one (epsilon, W) point.
///
/// mean_inv_dw is the intercept fitted to the instance-averaged sigma(t).
/// std_error combines the spread of per-instance intercepts (sample standard
/// deviation / sqrt(n)) with the OLS error of the averaged fit, in quadrature.
struct PhaseCell {
    double epsilon = 1.0;
    double width = 0.0;
    DisorderModel model = DisorderModel::none;
    double mean_inv_dw = 0.0;
    double std_error = 0.0;
    Transport classification = Transport::inconclusive;
    int instances = 0;

    FitResult average_fit;
    double instance_mean_inv_dw = 0.0;
    double instance_std_error = 0.0;
};

struct CellRecord {
    PhaseCell cell;
    SigmaSeries average;
    std::vector<InstanceResult> instances;  ///< in instance-index order
};

struct SweepResult {
    SweepPlan plan;
    std::vector<CellRecord> cells;  ///< epsilon-major, then W

    const CellRecord* find(double epsilon, double width) const {
        for (const auto& c : cells) {
            if (c.cell.epsilon == epsilon && c.cell.width == width) return &c;
        }
        return nullptr;
    }
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation / sqrt(n); zero for a single value.
inline double standard_error_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const auto n = static_cast<double>(v.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace detail

/// Averages sigma(t) over instances (all series must share sample times),
/// fits the average, and classifies. Summation runs in instance order.
inline CellRecord aggregate_cell(double epsilon, double width, DisorderModel model,
                                 std::vector<InstanceResult> instances, TimeWindow window,
                                 double threshold = kLocalizationThreshold) {
    detail::require(!instances.empty(), "aggregate: cell has no instances");
    const auto& first = instances.front().series.samples;
    detail::require(!first.empty(), "aggregate: empty sample list");
    for (const auto& inst : instances) {
        detail::require(inst.series.samples.size() == first.size(), "aggregate: instances disagree on sample times");
        for (std::size_t i = 0; i < first.size(); ++i) {
            detail::require(inst.series.samples[i].t == first[i].t, "aggregate: instances disagree on sample times");
        }
    }

    CellRecord record;
    record.average.meta = {epsilon, width, model, 0};
    record.average.samples.resize(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        double total = 0.0;
        for (const auto& inst : instances) total += inst.series.samples[i].sigma;
        record.average.samples[i] = {first[i].t, total / static_cast<double>(instances.size())};
    }

    std::vector<double> intercepts;
    intercepts.reserve(instances.size());
    for (auto& inst : instances) {
        inst.fit = fit_inv_dw(extrapolation_points(inst.series), window);
        intercepts.push_back(inst.fit.inv_dw);
    }

    PhaseCell& cell = record.cell;
    cell.epsilon = epsilon;
    cell.width = width;
    cell.model = model;
    cell.instances = static_cast<int>(instances.size());
    cell.average_fit = fit_inv_dw(extrapolation_points(record.average), window);
    cell.instance_mean_inv_dw = detail::mean_of(intercepts);
    cell.instance_std_error = detail::standard_error_of(intercepts);
    cell.mean_inv_dw = cell.average_fit.inv_dw;
    cell.std_error = std::hypot(cell.instance_std_error, cell.average_fit.std_error);
    cell.classification = classify(cell.mean_inv_dw, cell.std_error, threshold);
    record.instances = std::move(instances);
    return record;
}

/// Worker count from QWALK_WORKERS, else the hardware concurrency.
inline unsigned default_worker_count() {
    if (const char* env = std::getenv("QWALK_WORKERS")) {
        unsigned n = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc{} && ptr == s.data() + s.size() && n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline SigmaSeries run_instance(const SweepPlan& plan, double epsilon, double width, int instance,
                                std::span<const std::int64_t> times) {
    const CoinField field(epsilon, {plan.model, width, plan.instance_seed(instance)}, plan.t_max);
    return evolve(field, plan.psi_ic, plan.t_max, times);
}

/// Every (cell, instance) job is independent; results are slotted by job
/// index so the outcome does not depend on scheduling or worker count.
inline SweepResult run_sweep(const SweepPlan& plan, unsigned workers = default_worker_count()) {
    validate(plan);
    const auto times = geometric_sample_times(plan.t_max, plan.samples_per_octave);
    const std::size_t n_inst = static_cast<std::size_t>(plan.instances);
    const std::size_t n_jobs = plan.cell_count() * n_inst;
    std::vector<SigmaSeries> outputs(n_jobs);

    auto job_params = [&](std::size_t job) {
        const std::size_t cell = job / n_inst;
        const double eps = plan.epsilons[cell / plan.widths.size()];
        const double w = plan.widths[cell % plan.widths.size()];
        return std::tuple{eps, w, static_cast<int>(job % n_inst)};
    };

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) {
            try {
                const auto [eps, w, inst] = job_params(job);
                outputs[job] = run_instance(plan, eps, w, inst, times);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_jobs)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.plan = plan;
    for (std::size_t cell = 0; cell < plan.cell_count(); ++cell) {
        std::vector<InstanceResult> instances(n_inst);
        for (std::size_t i = 0; i < n_inst; ++i) {
            instances[i].instance = static_cast<int>(i);
            instances[i].series = std::move(outputs[cell * n_inst + i]);
        }
        const auto [eps, w, unused] = job_params(cell * n_inst);
        result.cells.push_back(
            aggregate_cell(eps, w, plan.model, std::move(instances), plan.fit_window(), plan.threshold));
    }
    return result;
}

// --- serialization -----------------------------------------------------------

/// Shortest round-trip decimal form; locale-independent and deterministic.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline const char* const kSampleHeader = "epsilon,W,model,instance,t,sigma";
inline const char* const kAggregateHeader = "epsilon,W,mean_inv_dw,stderr,classification,n_instances";
inline const char* const kExtrapolationHeader = "t,X,Y,Y_stderr,sigma_mean,sigma_stderr";

inline void write_samples_csv(const SweepResult& result, std::ostream& out) {
    out << kSampleHeader << '\n';
    for (const auto& rec : result.cells) {
        for (const auto& inst : rec.instances) {
            for (const auto& s : inst.series.samples) {
                out << format_double(rec.cell.epsilon) << ',' << format_double(rec.cell.width) << ','
                    << to_string(rec.cell.model) << ',' << inst.instance << ',' << s.t << ','
                    << format_double(s.sigma) << '\n';
            }
        }
    }
}

inline void write_aggregate_csv(const std::vector<CellRecord>& cells, std::ostream& out) {
    out << kAggregateHeader << '\n';
    for (const auto& rec : cells) {
        const PhaseCell& c = rec.cell;
        out << format_double(c.epsilon) << ',' << format_double(c.width) << ',' << format_double(c.mean_inv_dw)
            << ',' << format_double(c.std_error) << ',' << to_string(c.classification) << ',' << c.instances
            << '\n';
    }
}

inline nlohmann::ordered_json manifest_json(const SweepPlan& plan) {
    nlohmann::ordered_json j;
    j["artifact"] = kArtifactName;
    j["artifact_version"] = kVersion;
    j["generator_id"] = AngleStream::kGeneratorName;
    j["instance_seed_rule"] = "base_seed + instance";
    j["epsilon"] = plan.epsilons;
    j["W"] = plan.widths;
    j["model"] = std::string(to_string(plan.model));
    j["instances"] = plan.instances;
    j["base_seed"] = plan.base_seed;
    j["t_max"] = plan.t_max;
    j["half_width"] = plan.t_max;
    j["psi_ic"] = {plan.psi_ic.up.real(), plan.psi_ic.up.imag(), plan.psi_ic.down.real(),
                   plan.psi_ic.down.imag()};
    j["samples_per_octave"] = plan.samples_per_octave;
    j["fit_window"] = {plan.fit_window().lo, plan.fit_window().hi};
    j["threshold"] = plan.threshold;
    return j;
}

struct EmitOptions {
    bool archive = true;  ///< write the per-sample CSV
};

struct EmittedFiles {
    std::optional<std::filesystem::path> samples;
    std::filesystem::path aggregate;
    std::filesystem::path manifest;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace detail

/// Writes samples.csv (optional), aggregate.csv and manifest.json into dir.
inline EmittedFiles emit_results(const SweepResult& result, const std::filesystem::path& dir,
                                 EmitOptions options = {}) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw io_error("cannot create directory " + dir.string());

    EmittedFiles files;
    if (options.archive) {
        files.samples = dir / "samples.csv";
        auto out = detail::open_output(*files.samples);
        write_samples_csv(result, out);
        detail::finish_output(out, *files.samples);
    }
    files.aggregate = dir / "aggregate.csv";
    {
        auto out = detail::open_output(files.aggregate);
        write_aggregate_csv(result.cells, out);
        detail::finish_output(out, files.aggregate);
    }
    files.manifest = dir / "manifest.json";
    {
        auto out = detail::open_output(files.manifest);
        out << manifest_json(result.plan).dump(2) << '\n';
        detail::finish_output(out, files.manifest);
    }
    return files;
}

/// Extrapolation-plot rows for one cell: Y of the averaged sigma together with
/// the instance spread of Y and of sigma.
inline void write_extrapolation_table(const CellRecord& record, std::ostream& out) {
    detail::require(!record.average.samples.empty(), "extrapolation table: empty sample list");
    out << kExtrapolationHeader << '\n';
    const auto& avg = record.average.samples;
    for (std::size_t i = 0; i < avg.size(); ++i) {
        const std::int64_t t = avg[i].t;
        if (t < 2 || !(avg[i].sigma > 0.0)) continue;
        const double log_t = std::log(static_cast<double>(t));
        std::vector<double> ys, sigmas;
        for (const auto& inst : record.instances) {
            const double s = inst.series.samples[i].sigma;
            sigmas.push_back(s);
            if (s > 0.0) ys.push_back(std::log(s) / log_t);
        }
        out << t << ',' << format_double(1.0 / log_t) << ',' << format_double(std::log(avg[i].sigma) / log_t)
            << ',' << format_double(detail::standard_error_of(ys)) << ',' << format_double(avg[i].sigma) << ','
            << format_double(detail::standard_error_of(sigmas)) << '\n';
    }
}

inline void emit_extrapolation_table(const SweepResult& result, double epsilon, double width,
                                     const std::filesystem::path& path) {
    const CellRecord* rec = result.find(epsilon, width);
    if (!rec) {
        throw precondition_error("no cell with epsilon=" + format_double(epsilon) + ", W=" + format_double(width));
    }
    auto out = detail::open_output(path);
    write_extrapolation_table(*rec, out);
    detail::finish_output(out, path);
}

// --- archive reading -----------------------------------------------------------

/// One cell's raw series as read back from samples.csv.
struct ArchivedCell {
    double epsilon = 1.0;
    double width = 0.0;
    DisorderModel model = DisorderModel::none;
    std::vector<InstanceResult> instances;
};

namespace detail {

template <typename T>
T parse_field(std::string_view text, std::string_view what, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw precondition_error("samples.csv line " + std::to_string(line) + ": bad " + std::string(what) +
                                 " '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace detail

/// Reads the per-sample archive; cells keep their first-appearance order and
/// instances are ordered by index.
inline std::vector<ArchivedCell> read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSampleHeader) {
        throw precondition_error("samples.csv: missing header '" + std::string(kSampleHeader) + "'");
    }
    std::vector<ArchivedCell> cells;
    std::map<std::tuple<double, double, DisorderModel>, std::size_t> cell_index;
    std::vector<std::map<int, std::size_t>> instance_index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
            fields.push_back(rest.substr(0, pos));
        }
        fields.push_back(rest);
        if (fields.size() != 6) {
            throw precondition_error("samples.csv line " + std::to_string(line_no) + ": expected 6 fields");
        }
        const auto eps = detail::parse_field<double>(fields[0], "epsilon", line_no);
        const auto w = detail::parse_field<double>(fields[1], "W", line_no);
        const auto model = parse_disorder_model(fields[2]);
        const auto inst = detail::parse_field<int>(fields[3], "instance", line_no);
        const auto t = detail::parse_field<std::int64_t>(fields[4], "t", line_no);
        const auto sig = detail::parse_field<double>(fields[5], "sigma", line_no);

        const auto key = std::tuple{eps, w, model};
        auto [it, inserted] = cell_index.try_emplace(key, cells.size());
        if (inserted) {
            cells.push_back({eps, w, model, {}});
            instance_index.emplace_back();
        }
        ArchivedCell& cell = cells[it->second];
        auto [iit, new_inst] = instance_index[it->second].try_emplace(inst, cell.instances.size());
        if (new_inst) {
            InstanceResult r;
            r.instance = inst;
            r.series.meta = {eps, w, model, 0};
            cell.instances.push_back(std::move(r));
        }
        auto& samples = cell.instances[iit->second].series.samples;
        if (!samples.empty() && t <= samples.back().t) {
            throw precondition_error("samples.csv line " + std::to_string(line_no) + ": times not increasing");
        }
        samples.push_back({t, sig});
    }
    for (auto& c : cells) {
        std::sort(c.instances.begin(), c.instances.end(),
                  [](const InstanceResult& a, const InstanceResult& b) { return a.instance < b.instance; });
    }
    return cells;
}

/// Re-fits archived series; the window defaults to the last four octaves
/// of the largest archived time.
inline std::vector<CellRecord> refit_archive(std::vector<ArchivedCell> archive, std::optional<TimeWindow> window,
                                             double threshold = kLocalizationThreshold) {
    std::vector<CellRecord> out;
    for (auto& cell : archive) {
        std::int64_t t_max = 0;
        for (const auto& inst : cell.instances) {
            if (!inst.series.samples.empty()) t_max = std::max(t_max, inst.series.samples.back().t);
        }
        out.push_back(aggregate_cell(cell.epsilon, cell.width, cell.model, std::move(cell.instances),
                                     window.value_or(default_window(t_max)), threshold));
    }
    return out;
}

}  // namespace qwalk

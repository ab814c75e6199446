#include "e3dtv/cli/commands.hpp"

#include "e3dtv/cli/image_export.hpp"
#include "e3dtv/cs_solver.hpp"
#include "e3dtv/denoise.hpp"
#include "e3dtv/metrics.hpp"
#include "e3dtv/noise.hpp"
#include "e3dtv/phantom.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <system_error>

namespace e3dtv::cli {

namespace fs = std::filesystem;

void OutputStage::add(const fs::path& relative, Bytes bytes) { files_.emplace_back(relative, std::move(bytes)); }

void OutputStage::add_text(const fs::path& relative, const std::string& text) {
    add(relative, Bytes(text.begin(), text.end()));
}

std::vector<fs::path> OutputStage::paths() const {
    std::vector<fs::path> out;
    for (const auto& f : files_) out.push_back(root_ / f.first);
    return out;
}

void OutputStage::commit() {
    std::vector<fs::path> written;
    auto discard = [&] {
        std::error_code ec;
        for (const auto& tmp : written) fs::remove(tmp, ec);
    };
    try {
        for (const auto& [rel, bytes] : files_) {
            const fs::path target = root_ / rel;
            fs::create_directories(target.parent_path());
            fs::path tmp = target;
            tmp += ".tmp";
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("cannot write " + tmp.string());
            written.push_back(tmp);
            os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            os.close();
            if (!os) throw std::runtime_error("short write to " + tmp.string());
        }
        for (const auto& [rel, bytes] : files_) {
            const fs::path target = root_ / rel;
            fs::path tmp = target;
            tmp += ".tmp";
            fs::rename(tmp, target);
        }
    } catch (...) {
        discard();
        throw;
    }
}

namespace {

struct RunStatus {
    bool converged = true;
    std::string note;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

HsiTensor clipped(HsiTensor t) {
    t.unfolded() = t.unfolded().cwiseMax(0.0).cwiseMin(1.0);
    return t;
}

fs::path required_path(const RunConfig& cfg, const std::string& key, const std::string& command) {
    if (!cfg.has(key)) throw ConfigError(command + ": config key '" + key + "' is required");
    return fs::path(cfg.get_string(key));
}

std::string report_csv(const SolverReport& r, const std::vector<int>* cg) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "iteration,fidelity_residual,gradient_residual,objective,mu";
    if (cg) os << ",cg_iterations";
    os << '\n';
    for (int t = 0; t < r.iterations; ++t) {
        const auto i = static_cast<std::size_t>(t);
        os << t + 1 << ',' << r.fidelity_residual[i] << ',' << r.gradient_residual[i] << ',' << r.objective[i] << ','
           << r.mu[i];
        if (cg) os << ',' << (*cg)[i];
        os << '\n';
    }
    return os.str();
}

std::string summary_text(const std::string& command, Dims dims, const SolverReport& r) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "command=" << command << '\n';
    os << "dims=" << dims.h << 'x' << dims.w << 'x' << dims.s << '\n';
    os << "iterations=" << r.iterations << '\n';
    os << "converged=" << (r.converged ? "true" : "false") << '\n';
    if (r.iterations > 0) {
        os << "final_fidelity_residual=" << r.fidelity_residual.back() << '\n';
        os << "final_gradient_residual=" << r.gradient_residual.back() << '\n';
        os << "final_objective=" << r.objective.back() << '\n';
    }
    return os.str();
}

std::string quality_csv(const QualityReport& q) {
    std::ostringstream os;
    q.write_csv(os);
    return os.str();
}

void stage_bands(OutputStage& stage, const RunConfig& cfg, const HsiTensor& t, const std::string& prefix) {
    for (Index k : cfg.get_band_list("export_bands", t.s())) {
        stage.add(fs::path("bands") / (prefix + "_band_" + std::to_string(k + 1) + ".pgm"), encode_band_pgm(t, k));
    }
}

HsiTensor make_phantom(const RunConfig& cfg) {
    const long long rank = cfg.get_int("phantom_rank");
    if (rank < 1) throw ConfigError("phantom_rank must be positive");
    const double smooth = cfg.get_double("smoothness");
    if (!(smooth >= 0.0)) throw ConfigError("smoothness must be non-negative");
    return gen_phantom(cfg.phantom_dims(), static_cast<Index>(rank), smooth, cfg.get_seed());
}

RunStatus cmd_phantom(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const HsiTensor x = make_phantom(cfg);
    stage.add("phantom.e3t", encode_tensor(x));
    stage_bands(stage, cfg, x, "phantom");
    out << "phantom " << x.h() << 'x' << x.w() << 'x' << x.s() << '\n';
    return {};
}

RunStatus cmd_simulate_noise(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const fs::path input = required_path(cfg, "input", "simulate-noise");
    const HsiTensor clean = read_tensor(input);
    const NoiseSpec real = cfg.noise_spec(clean.s());
    real.validate(clean.dims());
    (void)cfg.get_band_list("export_bands", clean.s());
    HsiTensor noisy = apply_noise(clean, real);
    if (cfg.get_bool("clip")) noisy = clipped(std::move(noisy));
    stage.add("noisy.e3t", encode_tensor(noisy));
    stage_bands(stage, cfg, noisy, "noisy");
    out << "noise case " << noise_case_letter(real.noise_case) << ", input psnr " << fmt(psnr(clean, noisy).mean)
        << " dB\n";
    return {};
}

void add_quality(const RunConfig& cfg, OutputStage& stage, const HsiTensor& est, std::ostream& out) {
    if (!cfg.has("reference")) return;
    const HsiTensor ref = read_tensor(cfg.get_string("reference"));
    if (ref.dims() != est.dims()) throw ConfigError("reference and result differ in shape");
    const QualityReport q = evaluate_quality(ref, est);
    stage.add_text("quality.csv", quality_csv(q));
    out << "psnr " << fmt(q.psnr_db) << " dB, ssim " << fmt(q.ssim) << ", ergas " << fmt(q.ergas) << '\n';
}

RunStatus cmd_denoise(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const fs::path input = required_path(cfg, "input", "denoise");
    const bool clip = cfg.get_bool("clip");
    const HsiTensor y = read_tensor(input);
    const SolverConfig scfg = cfg.solver_config(y.dims());
    (void)cfg.get_band_list("export_bands", y.s());

    DenoiseResult res = denoise(y, scfg);
    const HsiTensor x = clip ? clipped(res.x) : res.x;
    stage.add("x.e3t", encode_tensor(x));
    stage.add("e.e3t", encode_tensor(res.e));
    stage.add_text("report.csv", report_csv(res.report, nullptr));
    stage.add_text("summary.txt", summary_text("denoise", y.dims(), res.report));
    add_quality(cfg, stage, x, out);
    stage_bands(stage, cfg, x, "x");
    out << "denoise: " << res.report.iterations << " iterations, "
        << (res.report.converged ? "converged" : "not converged") << '\n';
    return {res.report.converged, "denoise did not converge within max_iters"};
}

RunStatus cmd_cs_sample(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const fs::path input = required_path(cfg, "input", "cs-sample");
    const double ratio = cfg.get_double("ratio");
    const HsiTensor x = read_tensor(input);
    const CompressiveOperator op = CompressiveOperator::build(x.dims(), ratio, cfg.get_seed());
    Measurement meas{OperatorDescriptor::describe(op), op.apply(x.unfolded())};
    stage.add("measurement.e3m", encode_measurement(meas));
    out << "cs-sample: m = " << op.m() << " of n = " << op.n() << '\n';
    return {};
}

RunStatus cmd_cs_reconstruct(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const fs::path path = required_path(cfg, "measurement", "cs-reconstruct");
    const Measurement meas = read_measurement(path);
    const Dims d = meas.op.dims;
    const std::pair<const char*, Index> dims[] = {{"h", d.h}, {"w", d.w}, {"s", d.s}};
    for (const auto& [key, value] : dims) {
        if (cfg.origin(key) != RunConfig::Origin::Default && cfg.get_int(key) != value) {
            throw ConfigError(std::string("config ") + key + " = " + cfg.get_string(key) +
                              " does not match the measurement file (" + std::to_string(value) + ")");
        }
    }
    (void)cfg.get_band_list("export_bands", d.s);
    const bool clip = cfg.get_bool("clip");
    const CsConfig ccfg = cfg.cs_config(meas.op.ratio, d.s);
    const CompressiveOperator op = meas.op.build();

    CsResult res = reconstruct(meas.y, op, ccfg);
    const HsiTensor z = clip ? clipped(res.z) : res.z;
    stage.add("z.e3t", encode_tensor(z));
    stage.add("x.e3t", encode_tensor(res.x));
    stage.add_text("report.csv", report_csv(res.report, &res.cg_iterations));
    stage.add_text("summary.txt", summary_text("cs-reconstruct", d, res.report));
    add_quality(cfg, stage, z, out);
    stage_bands(stage, cfg, z, "z");
    out << "cs-reconstruct: " << res.report.iterations << " iterations, "
        << (res.report.converged ? "converged" : "not converged") << '\n';
    return {res.report.converged, "cs-reconstruct did not converge within max_iters"};
}

RunStatus cmd_evaluate(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const fs::path input = required_path(cfg, "input", "evaluate");
    required_path(cfg, "reference", "evaluate");
    const HsiTensor est = read_tensor(input);
    add_quality(cfg, stage, est, out);
    stage_bands(stage, cfg, est, "input");
    return {};
}

struct MethodScores {
    QualityReport input, e3dtv, baseline;
};

void add_benchmark_rows(std::ostringstream& csv, const std::string& label, const MethodScores& m) {
    csv << label << ",psnr," << m.input.psnr_db << ',' << m.e3dtv.psnr_db << ',' << m.baseline.psnr_db << '\n';
    csv << label << ",ssim," << m.input.ssim << ',' << m.e3dtv.ssim << ',' << m.baseline.ssim << '\n';
    csv << label << ",ergas," << m.input.ergas << ',' << m.e3dtv.ergas << ',' << m.baseline.ergas << '\n';
}

void add_benchmark_plots(OutputStage& stage, const std::string& label, const MethodScores& m) {
    stage.add(fs::path("plots") / ("psnr_" + label + ".pgm"),
              encode_series_plot_pgm({m.input.band_psnr, m.e3dtv.band_psnr, m.baseline.band_psnr}));
    stage.add(fs::path("plots") / ("ssim_" + label + ".pgm"),
              encode_series_plot_pgm({m.input.band_ssim, m.e3dtv.band_ssim, m.baseline.band_ssim}));
}

RunStatus cmd_benchmark(const RunConfig& cfg, OutputStage& stage, std::ostream& out) {
    const std::string mode = cfg.get_string("bench_mode");
    if (mode != "noise" && mode != "ratio") throw ConfigError("bench_mode must be 'noise' or 'ratio'");
    const HsiTensor ref = make_phantom(cfg);
    const Dims dims = ref.dims();

    std::ostringstream csv;
    csv << std::setprecision(10);
    csv << (mode == "noise" ? "case" : "ratio") << ",metric,input,e3dtv,3dtv\n";
    std::ostringstream conv;
    RunStatus status;

    if (mode == "noise") {
        std::vector<NoiseSpec> specs;
        const std::string cases = cfg.get_string("cases");
        if (cases.empty()) throw ConfigError("cases must list at least one noise case");
        for (char c : cases) {
            specs.push_back(cfg.noise_spec(parse_noise_case(std::string(1, c)), dims.s));
            specs.back().validate(dims);
        }
        const SolverConfig e3 = cfg.solver_config(dims);
        SolverConfig base = e3;
        base.baseline_3dtv = true;

        for (const NoiseSpec& spec : specs) {
            const std::string label(1, static_cast<char>(std::tolower(noise_case_letter(spec.noise_case))));
            const HsiTensor noisy = apply_noise(ref, spec);
            const DenoiseResult a = denoise(noisy, e3);
            const DenoiseResult b = denoise(noisy, base);
            const MethodScores m{evaluate_quality(ref, noisy), evaluate_quality(ref, a.x), evaluate_quality(ref, b.x)};
            add_benchmark_rows(csv, label, m);
            add_benchmark_plots(stage, "case_" + label, m);
            conv << label << ',' << a.report.iterations << ',' << a.report.converged << ',' << b.report.iterations
                 << ',' << b.report.converged << '\n';
            status.converged = status.converged && a.report.converged && b.report.converged;
            out << "case " << label << ": input " << fmt(m.input.psnr_db) << " dB, e3dtv " << fmt(m.e3dtv.psnr_db)
                << " dB, 3dtv " << fmt(m.baseline.psnr_db) << " dB\n";
        }
    } else {
        const std::vector<double> ratios = cfg.get_double_list("ratios");
        if (ratios.empty()) throw ConfigError("ratios must list at least one sampling ratio");
        std::vector<std::pair<CsConfig, CsConfig>> configs;
        for (double r : ratios) {
            CsConfig e3 = cfg.cs_config(r, dims.s);
            CsConfig base = e3;
            base.baseline_3dtv = true;
            configs.emplace_back(e3, base);
        }
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            const CompressiveOperator op = CompressiveOperator::build(dims, ratios[i], cfg.get_seed());
            const Vector y = op.apply(ref.unfolded());
            const HsiTensor backprojection(dims, op.adjoint_matrix(std::span<const double>(
                                                     y.data(), static_cast<std::size_t>(y.size()))));
            const CsResult a = reconstruct(y, op, configs[i].first);
            const CsResult b = reconstruct(y, op, configs[i].second);
            const MethodScores m{evaluate_quality(ref, backprojection), evaluate_quality(ref, a.z),
                                 evaluate_quality(ref, b.z)};
            const std::string label = fmt(ratios[i]);
            add_benchmark_rows(csv, label, m);
            add_benchmark_plots(stage, "ratio_" + label, m);
            conv << label << ',' << a.report.iterations << ',' << a.report.converged << ',' << b.report.iterations
                 << ',' << b.report.converged << '\n';
            status.converged = status.converged && a.report.converged && b.report.converged;
            out << "ratio " << label << ": e3dtv " << fmt(m.e3dtv.psnr_db) << " dB, 3dtv " << fmt(m.baseline.psnr_db)
                << " dB\n";
        }
    }

    stage.add_text("benchmark.csv", csv.str());
    stage.add_text("convergence.csv",
                   std::string(mode == "noise" ? "case" : "ratio") +
                       ",e3dtv_iterations,e3dtv_converged,3dtv_iterations,3dtv_converged\n" + conv.str());
    status.note = "benchmark: at least one run did not converge within max_iters (see convergence.csv)";
    return status;
}

using Command = std::function<RunStatus(const RunConfig&, OutputStage&, std::ostream&)>;

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table = {
        {"phantom", cmd_phantom},         {"simulate-noise", cmd_simulate_noise},
        {"denoise", cmd_denoise},         {"cs-sample", cmd_cs_sample},
        {"cs-reconstruct", cmd_cs_reconstruct}, {"evaluate", cmd_evaluate},
        {"benchmark", cmd_benchmark},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, fn] : commands()) n.push_back(name);
        return n;
    }();
    return names;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto it = commands().find(name);
    if (it == commands().end()) {
        err << "error: unknown command '" << name << "'\n";
        return kExitConfig;
    }
    try {
        if (cfg.get_int("threads") < 1) throw ConfigError("threads must be >= 1");
        (void)cfg.get_seed();
        OutputStage stage(cfg.get_string("output_dir"));
        const RunStatus status = it->second(cfg, stage, out);
        stage.commit();
        if (!status.converged) {
            err << "error: " << status.note << '\n';
            return kExitNumerical;
        }
        return kExitOk;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::domain_error& e) {
        err << "invalid data: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace e3dtv::cli

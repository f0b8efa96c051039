#include "commands.hpp"

#include <algorithm>
#include <future>
#include <iostream>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "scene_loader.hpp"
#include "spotlight/compositor.hpp"
#include "spotlight/imageio.hpp"
#include "spotlight/metrics.hpp"
#include "spotlight/report.hpp"
#include "spotlight/sidecar.hpp"
#include "spotlight/toy_denoiser.hpp"
#include "spotlight/transport.hpp"

namespace spotlight::cli {

using nlohmann::json;

namespace {

/// Files are written under temporary names and renamed into place only once
/// every artifact has been produced. Anything left uncommitted is removed.
class StagedOutputs {
public:
    explicit StagedOutputs(fs::path dir) : dir_(std::move(dir)) {}
    StagedOutputs(const StagedOutputs&) = delete;
    StagedOutputs& operator=(const StagedOutputs&) = delete;

    ~StagedOutputs() {
        if (!committed_) {
            std::error_code ec;
            for (const auto& [name, tmp] : staged_) {
                fs::remove(tmp, ec);
            }
        }
    }

    fs::path stage(const std::string& name) {
        if (!created_) {
            fs::create_directories(dir_);
            created_ = true;
        }
        fs::path tmp = dir_ / ("." + name + ".tmp");
        staged_.emplace_back(name, tmp);
        return tmp;
    }

    const std::vector<std::pair<std::string, fs::path>>& staged() const noexcept { return staged_; }

    void commit() {
        for (const auto& [name, tmp] : staged_) {
            fs::rename(tmp, dir_ / name);
        }
        committed_ = true;
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, fs::path>> staged_;
    bool created_ = false;
    bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FileError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw FileError("cannot write " + path.string());
    }
}

// ----------------------------------------------------------------------------
// shadow

ShadowKind kind_for_mode(const std::string& mode) {
    if (mode == "map") {
        return ShadowKind::directional;
    }
    if (mode == "pixht") {
        return ShadowKind::point;
    }
    if (mode == "scribble") {
        return ShadowKind::scribble;
    }
    throw InvalidArgument("shadow mode must be map, pixht or scribble");
}

const char* spec_name(ShadowKind k) {
    switch (k) {
    case ShadowKind::directional: return "directional";
    case ShadowKind::point: return "point";
    case ShadowKind::scribble: return "scribble";
    case ShadowKind::mask: return "mask";
    }
    return "?";
}

// ----------------------------------------------------------------------------
// render

struct RenderSetup {
    Manifest manifest;
    GuidanceConfig cfg;
    std::string denoiser;
    std::string sidecar_addr;
    std::string prediction;
    double sidecar_timeout_s = 60.0;
};

GuidanceConfig effective_config(const Manifest& m, const RenderOptions& opt) {
    GuidanceConfig cfg;
    const auto& g = m.guidance;
    cfg.gamma = opt.gamma.value_or(g.gamma.value_or(cfg.gamma));
    cfg.beta = opt.beta.value_or(g.beta.value_or(cfg.beta));
    cfg.steps = opt.steps.value_or(g.steps.value_or(cfg.steps));
    cfg.seed = opt.seed.value_or(g.seed.value_or(cfg.seed));
    cfg.dilation_kernel = g.dilation_kernel.value_or(cfg.dilation_kernel);
    cfg.negative = opt.negative ? parse_negative_mode(*opt.negative) : g.negative.value_or(cfg.negative);
    cfg.positive_only = opt.positive_only;
    cfg.blending = !opt.no_blend;
    cfg.validate();
    return cfg;
}

json config_json(const GuidanceConfig& cfg) {
    return json{{"gamma", cfg.gamma},
                {"beta", cfg.beta},
                {"steps", cfg.steps},
                {"train_steps", cfg.train_steps},
                {"seed", cfg.seed},
                {"negative", to_string(cfg.negative)},
                {"dilation_kernel", cfg.dilation_kernel},
                {"positive_only", cfg.positive_only},
                {"blending", cfg.blending}};
}

GuidanceConfig config_from_json(const json& j) {
    GuidanceConfig cfg;
    try {
        cfg.gamma = j.at("gamma").get<double>();
        cfg.beta = j.at("beta").get<double>();
        cfg.steps = j.at("steps").get<int>();
        cfg.train_steps = j.at("train_steps").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.negative = parse_negative_mode(j.at("negative").get<std::string>());
        cfg.dilation_kernel = j.at("dilation_kernel").get<int>();
        cfg.positive_only = j.at("positive_only").get<bool>();
        cfg.blending = j.at("blending").get<bool>();
    } catch (const json::exception& e) {
        throw ManifestError(std::string("record config is malformed: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json load_json(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw ManifestError(std::string("cannot open ") + what + " " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ManifestError(path.string() + " is not valid JSON: " + e.what());
    }
}

PredictionKind parse_prediction(const std::string& s) {
    if (s == "v") {
        return PredictionKind::v;
    }
    if (s == "eps") {
        return PredictionKind::eps;
    }
    throw InvalidArgument("prediction must be 'v' or 'eps'");
}

std::unique_ptr<SidecarBackend> connect_sidecar(const RenderSetup& setup) {
    const Timeout timeout{static_cast<long long>(setup.sidecar_timeout_s * 1000.0)};
    std::vector<std::unique_ptr<SidecarClient>> clients;
    // One connection per branch so the two evaluations can overlap.
    for (int i = 0; i < 2; ++i) {
        auto client = std::make_unique<SidecarClient>(connect_address(setup.sidecar_addr, timeout));
        client->handshake();
        clients.push_back(std::move(client));
    }
    return std::make_unique<SidecarBackend>(std::move(clients), parse_prediction(setup.prediction));
}

RenderSetup setup_from_options(const RenderOptions& opt) {
    RenderSetup s;
    if (!opt.manifest) {
        throw InvalidArgument("render needs a manifest or --replay");
    }
    s.manifest = load_manifest(*opt.manifest);
    s.cfg = effective_config(s.manifest, opt);
    s.denoiser = opt.denoiser;
    s.prediction = opt.prediction;
    s.sidecar_timeout_s = opt.sidecar_timeout_s;
    if (s.denoiser == "sidecar") {
        if (opt.sidecar_addr) {
            s.sidecar_addr = *opt.sidecar_addr;
        } else if (const char* env = std::getenv("SPOTLIGHT_SIDECAR_ADDR"); env != nullptr && *env) {
            s.sidecar_addr = env;
        } else {
            throw InvalidArgument("--denoiser sidecar needs --sidecar-addr or SPOTLIGHT_SIDECAR_ADDR");
        }
    } else if (s.denoiser != "toy") {
        throw InvalidArgument("denoiser must be 'toy' or 'sidecar'");
    }
    parse_prediction(s.prediction);
    return s;
}

struct ReplayRecord {
    json doc;
    RenderSetup setup;
};

ReplayRecord setup_from_record(const fs::path& path, const RenderOptions& opt) {
    ReplayRecord r;
    r.doc = load_json(path, "record");
    try {
        const fs::path manifest = r.doc.at("manifest").get<std::string>();
        r.setup.manifest = load_manifest(manifest);
        if (sha256_file(manifest) != r.doc.at("manifest_sha256").get<std::string>()) {
            throw ManifestError("manifest " + manifest.string() + " changed since the record was written");
        }
        for (const auto& in : r.doc.at("inputs")) {
            const fs::path p = in.at("path").get<std::string>();
            if (!fs::is_regular_file(p) || sha256_file(p) != in.at("sha256").get<std::string>()) {
                throw ManifestError("input " + p.string() + " is missing or changed since the record was written");
            }
        }
        r.setup.cfg = config_from_json(r.doc.at("config"));
        r.setup.denoiser = r.doc.at("denoiser").get<std::string>();
        r.setup.prediction = r.doc.value("prediction", std::string("v"));
        if (r.setup.denoiser == "sidecar") {
            r.setup.sidecar_addr = opt.sidecar_addr ? *opt.sidecar_addr : r.doc.at("sidecar_addr").get<std::string>();
        }
        r.setup.sidecar_timeout_s = opt.sidecar_timeout_s;
    } catch (const json::exception& e) {
        throw ManifestError("record " + path.string() + " is malformed: " + e.what());
    }
    return r;
}

std::string trace_csv(const std::vector<StepTrace>& trace) {
    Table t;
    t.header = {"step", "t", "t_prev", "branch_gap", "blend_weight", "latent_rms"};
    for (const auto& s : trace) {
        t.rows.push_back({std::to_string(s.step), std::to_string(s.t), std::to_string(s.t_prev),
                          format_fixed(s.branch_gap, 9), format_fixed(s.blend_weight, 9),
                          format_fixed(s.latent_rms, 9)});
    }
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

// ----------------------------------------------------------------------------
// eval

PixelMap load_for_metrics(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    // Stored values are compared as they are, without a transfer curve.
    return ext == ".pfm" ? read_pfm(path) : read_png(path);
}

bool is_image(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pfm";
}

std::set<std::string> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw FileError(dir.string() + " is not a directory");
    }
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && is_image(e.path())) {
            names.insert(e.path().filename().string());
        }
    }
    return names;
}

}  // namespace

// ----------------------------------------------------------------------------

int cmd_shadow(const ShadowOptions& opt, std::ostream& out, std::ostream& err) {
    const ShadowKind want = kind_for_mode(opt.mode);
    const Manifest m = load_manifest(opt.manifest);
    if (m.shadow.kind != want) {
        throw ManifestError("mode '" + opt.mode + "' needs a " + spec_name(want) + " shadow spec, manifest has " +
                            spec_name(m.shadow.kind));
    }
    const LoadedScene scene = load_scene(m);
    const ShadowPair shadows = synthesize_shadows(scene);
    if (shadows.positive.all_zero()) {
        err << "warning: the positive shadow mask is empty\n";
    }

    StagedOutputs staged(opt.out);
    write_mask_png(staged.stage("shadow_pos.png"), shadows.positive);
    if (want != ShadowKind::scribble) {
        write_mask_png(staged.stage("shadow_neg.png"), *shadows.negative);
    }
    staged.commit();
    for (const auto& [name, tmp] : staged.staged()) {
        out << (opt.out / name).string() << '\n';
    }
    return kOk;
}

int cmd_render(const RenderOptions& opt, std::ostream& out, std::ostream& err) {
    std::optional<ReplayRecord> record;
    RenderSetup setup;
    if (opt.replay) {
        record = setup_from_record(*opt.replay, opt);
        setup = record->setup;
    } else {
        setup = setup_from_options(opt);
    }

    const LoadedScene scene = load_scene(setup.manifest);
    const ShadowPair shadows = synthesize_shadows(scene);
    const SceneBundle bundle = make_bundle(scene, shadows, setup.cfg.negative);
    bundle.validate();

    SamplerResult result;
    if (setup.denoiser == "sidecar") {
        auto backend = connect_sidecar(setup);
        result = run_sampler(bundle, setup.cfg, *backend, *backend);
    } else {
        ToyDenoiser toy(ToyTargetRule::shaded_composite, setup.cfg.train_steps);
        IdentityCodec codec(3);
        result = run_sampler(bundle, setup.cfg, toy, codec);
    }
    const ShadowMatte matte = shadow_matte(result.image_with, result.image_without);
    const PixelMap composite = preserve_background(bundle.background, result.image_with, matte, bundle.object_mask);

    StagedOutputs staged(opt.out);
    write_png(staged.stage("composite.png"), composite);
    write_pfm(staged.stage("with.pfm"), result.image_with);
    write_pfm(staged.stage("without.pfm"), result.image_without);
    write_pfm(staged.stage("matte.pfm"), matte.attenuation);
    write_mask_png(staged.stage("shadow_pos.png"), bundle.shadow_positive);
    if (bundle.shadow_negative) {
        write_mask_png(staged.stage("shadow_neg.png"), *bundle.shadow_negative);
    }
    write_text(staged.stage("trace.csv"), trace_csv(result.trace));

    json outputs = json::object();
    for (const auto& [name, tmp] : staged.staged()) {
        outputs[name] = sha256_file(tmp);
    }
    json inputs = json::array();
    for (const auto& p : setup.manifest.referenced_files()) {
        inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    json provenance = json::object();
    for (const auto& ref : setup.manifest.intrinsics) {
        if (!ref.provenance.empty()) {
            provenance[ref.name] = ref.provenance;
        }
    }
    json rec{{"schema", 1},
             {"tool", "spotlight render"},
             {"manifest", setup.manifest.source.string()},
             {"manifest_sha256", sha256_file(setup.manifest.source)},
             {"inputs", inputs},
             {"intrinsics_provenance", provenance},
             {"config", config_json(setup.cfg)},
             {"denoiser", setup.denoiser},
             {"prediction", setup.prediction},
             {"outputs", outputs}};
    if (setup.denoiser == "sidecar") {
        rec["sidecar_addr"] = setup.sidecar_addr;
    }
    write_text(staged.stage("record.json"), rec.dump(2) + "\n");
    staged.commit();

    out << "wrote " << staged.staged().size() << " files to " << opt.out.string() << '\n';

    if (record) {
        const json& expected = record->doc.at("outputs");
        bool match = expected.size() == outputs.size();
        for (const auto& [name, hash] : outputs.items()) {
            if (!expected.contains(name) || expected.at(name) != hash) {
                err << "replay mismatch: " << name << '\n';
                match = false;
            }
        }
        if (!match) {
            return kFailure;
        }
        out << "replay: outputs match the record\n";
    }
    return kOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& /*err*/) {
    static const std::vector<std::string> known{"psnr", "ssim", "rmse", "mae"};
    for (const auto& m : opt.metrics) {
        if (std::find(known.begin(), known.end(), m) == known.end()) {
            throw InvalidArgument("unknown metric '" + m + "' (choose from psnr, ssim, rmse, mae)");
        }
    }
    const auto pred = list_images(opt.pred);
    const auto ref = list_images(opt.ref);
    std::vector<std::string> unmatched;
    std::set_symmetric_difference(pred.begin(), pred.end(), ref.begin(), ref.end(), std::back_inserter(unmatched));
    if (!unmatched.empty()) {
        throw FileError("unmatched file between prediction and reference directories: " + unmatched.front());
    }
    if (pred.empty()) {
        throw FileError("no images found in " + opt.pred.string());
    }
    const std::vector<std::string> names(pred.begin(), pred.end());

    // Load everything first so a bad file fails before any output.
    struct Job {
        PixelMap a, b;
        std::optional<MaskMap> mask;
    };
    std::vector<Job> jobs;
    for (const auto& name : names) {
        Job j{load_for_metrics(opt.pred / name), load_for_metrics(opt.ref / name), std::nullopt};
        if (!j.a.same_dims(j.b)) {
            throw DimensionMismatch(name + ": prediction and reference differ in size or channels");
        }
        if (opt.masks) {
            fs::path mp = *opt.masks / name;
            if (!fs::is_regular_file(mp)) {
                mp = (*opt.masks / name).replace_extension(".png");
            }
            if (!fs::is_regular_file(mp)) {
                throw FileError(name + ": no matching mask in " + opt.masks->string());
            }
            j.mask = load_mask(mp);
        }
        jobs.push_back(std::move(j));
    }

    const bool want_ssim = std::find(opt.metrics.begin(), opt.metrics.end(), "ssim") != opt.metrics.end();
    std::vector<MetricReport> reports(jobs.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < jobs.size(); start += workers) {
        std::vector<std::future<MetricReport>> batch;
        for (std::size_t i = start; i < std::min(jobs.size(), start + workers); ++i) {
            batch.push_back(std::async(std::launch::async, [&, i] {
                const Job& j = jobs[i];
                const MaskMap* mask = j.mask ? &*j.mask : nullptr;
                MetricReport r;
                if (want_ssim) {
                    r = pixel_metrics(j.a, j.b, mask);
                } else {
                    // SSIM is the expensive part; skip it when not requested.
                    SsimOptions tiny;
                    tiny.window = 1;
                    r = pixel_metrics(j.a, j.b, mask, tiny);
                }
                return r;
            }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) {
            reports[start + k] = batch[k].get();
        }
    }

    auto value = [](const MetricReport& r, const std::string& m) {
        if (m == "psnr") return r.psnr;
        if (m == "ssim") return r.ssim;
        if (m == "rmse") return r.rmse;
        return r.mae;
    };
    auto make_table = [&](int digits) {
        Table t;
        t.header.push_back("image");
        for (const auto& m : opt.metrics) {
            t.header.push_back(m);
        }
        std::vector<double> sums(opt.metrics.size(), 0.0);
        for (std::size_t i = 0; i < names.size(); ++i) {
            std::vector<std::string> row{names[i]};
            for (std::size_t k = 0; k < opt.metrics.size(); ++k) {
                const double v = value(reports[i], opt.metrics[k]);
                sums[k] += v;
                row.push_back(format_fixed(v, digits));
            }
            t.rows.push_back(std::move(row));
        }
        std::vector<std::string> mean{"mean"};
        for (double s : sums) {
            mean.push_back(format_fixed(s / static_cast<double>(names.size()), digits));
        }
        t.rows.push_back(std::move(mean));
        return t;
    };

    const Table console = make_table(4);
    const Table exact = make_table(10);
    std::string csv_text;
    std::string md_text;
    if (opt.csv) {
        std::ostringstream os;
        exact.write_csv(os);
        csv_text = os.str();
    }
    if (opt.markdown) {
        std::ostringstream os;
        console.write_markdown(os);
        md_text = os.str();
    }
    if (opt.csv || opt.markdown) {
        if (opt.csv) {
            StagedOutputs staged(opt.csv->parent_path().empty() ? fs::path(".") : opt.csv->parent_path());
            write_text(staged.stage(opt.csv->filename().string()), csv_text);
            staged.commit();
        }
        if (opt.markdown) {
            StagedOutputs staged(opt.markdown->parent_path().empty() ? fs::path(".") : opt.markdown->parent_path());
            write_text(staged.stage(opt.markdown->filename().string()), md_text);
            staged.commit();
        }
    }
    console.write_console(out);
    return kOk;
}

int cmd_study(const StudyOptions& opt, std::ostream& out, std::ostream& /*err*/) {
    if (opt.bootstrap < 0) {
        throw InvalidArgument("--bootstrap must be >= 0");
    }
    const VoteTable table = read_votes_csv(opt.votes);
    const int n = static_cast<int>(table.methods.size());
    const ThurstoneResult res = thurstone_case_v(n, table.votes, opt.bootstrap, opt.seed);
    const PreferenceMatrix P = PreferenceMatrix::from_votes(n, table.votes);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return res.z[a] > res.z[b]; });

    const bool ci = res.ci_low.has_value();
    auto make_table = [&](int digits) {
        Table t;
        t.header = {"rank", "method", "z"};
        if (ci) {
            t.header.push_back("ci_low");
            t.header.push_back("ci_high");
        }
        for (int r = 0; r < n; ++r) {
            const int i = order[r];
            std::vector<std::string> row{std::to_string(r + 1), table.methods[i], format_fixed(res.z[i], digits)};
            if (ci) {
                row.push_back(format_fixed((*res.ci_low)[i], digits));
                row.push_back(format_fixed((*res.ci_high)[i], digits));
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    };
    if (opt.csv) {
        std::ostringstream os;
        make_table(12).write_csv(os);
        StagedOutputs staged(opt.csv->parent_path().empty() ? fs::path(".") : opt.csv->parent_path());
        write_text(staged.stage(opt.csv->filename().string()), os.str());
        staged.commit();
    }
    out << n << " methods, " << table.votes.size() << " votes, " << P.observers << " observers";
    if (ci) {
        out << ", " << res.bootstrap_replicates << " bootstrap replicates";
    }
    out << '\n';
    make_table(4).write_console(out);
    return kOk;
}

// ----------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shadow-guided object relighting and compositing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spotlight 0.1.0");

    ShadowOptions shadow_opt;
    auto* shadow = app.add_subcommand("shadow", "Generate positive/negative shadow masks");
    shadow->add_option("manifest", shadow_opt.manifest, "Scene manifest (JSON)")->required();
    shadow->add_option("--mode", shadow_opt.mode, "map | pixht | scribble")
        ->required()
        ->check(CLI::IsMember({"map", "pixht", "scribble"}));
    shadow->add_option("--out", shadow_opt.out, "Output directory")->required();

    RenderOptions render_opt;
    auto* render = app.add_subcommand("render", "Render the composite for a scene");
    render->add_option("manifest", render_opt.manifest, "Scene manifest (JSON)");
    render->add_option("--replay", render_opt.replay, "Re-run from a reproducibility record");
    render->add_option("--out", render_opt.out, "Output directory")->required();
    render->add_option("--steps", render_opt.steps, "Inference steps");
    render->add_option("--gamma", render_opt.gamma, "Guidance scale");
    render->add_option("--beta", render_opt.beta, "Shadow latent weight");
    render->add_option("--seed", render_opt.seed, "Random seed");
    render->add_option("--negative", render_opt.negative, "opposite | noshadow")
        ->check(CLI::IsMember({"opposite", "noshadow"}));
    render->add_option("--denoiser", render_opt.denoiser, "toy | sidecar")
        ->check(CLI::IsMember({"toy", "sidecar"}));
    render->add_option("--sidecar-addr", render_opt.sidecar_addr, "host:port, tcp://host:port or exec:<command>");
    render->add_option("--sidecar-timeout", render_opt.sidecar_timeout_s, "Per-read timeout in seconds");
    render->add_option("--prediction", render_opt.prediction, "Prediction kind requested from the sidecar: v | eps")
        ->check(CLI::IsMember({"v", "eps"}));
    render->add_flag("--positive-only", render_opt.positive_only, "Evaluate only the positive branch");
    render->add_flag("--no-blend", render_opt.no_blend, "Disable latent shadow blending");

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "Reference-based image metrics");
    eval->add_option("pred", eval_opt.pred, "Directory of predictions")->required();
    eval->add_option("ref", eval_opt.ref, "Directory of references")->required();
    eval->add_option("--masks", eval_opt.masks, "Directory of masks restricting the metric region");
    eval->add_option("--metrics", eval_opt.metrics, "Subset of psnr, ssim, rmse, mae")->delimiter(',');
    eval->add_option("--csv", eval_opt.csv, "Write the table as CSV");
    eval->add_option("--markdown", eval_opt.markdown, "Write the table as Markdown");

    StudyOptions study_opt;
    auto* study = app.add_subcommand("study", "Thurstone Case V scaling of pairwise votes");
    study->add_option("votes", study_opt.votes, "Votes CSV")->required();
    study->add_option("--bootstrap", study_opt.bootstrap, "Bootstrap replicates (0 disables intervals)");
    study->add_option("--seed", study_opt.seed, "Bootstrap seed");
    study->add_option("--csv", study_opt.csv, "Write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInputError;
    }

    try {
        if (*shadow) {
            return cmd_shadow(shadow_opt, out, err);
        }
        if (*render) {
            if (render_opt.replay.has_value() == render_opt.manifest.has_value()) {
                throw InvalidArgument("render takes either a manifest or --replay");
            }
            return cmd_render(render_opt, out, err);
        }
        if (*eval) {
            return cmd_eval(eval_opt, out, err);
        }
        return cmd_study(study_opt, out, err);
    } catch (const GeometryError& e) {
        err << "error: " << e.what() << '\n';
        return kGeometryError;
    } catch (const NumericalAbort& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalAbort;
    } catch (const DenoiserError& e) {
        err << "error: " << e.what() << '\n';
        return kDenoiserError;
    } catch (const TransportError& e) {
        err << "error: sidecar transport: " << e.what() << '\n';
        return kDenoiserError;
    } catch (const ProtocolError& e) {
        err << "error: sidecar protocol: " << e.what() << '\n';
        return kDenoiserError;
    } catch (const RemoteError& e) {
        err << "error: sidecar: " << e.what() << '\n';
        return kDenoiserError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"spotlight"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spotlight::cli

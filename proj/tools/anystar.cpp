#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "anystar/dataset.hpp"
#include "anystar/io.hpp"

using namespace anystar;

namespace {

enum Exit { kOk = 0, kUsage = 1, kPartial = 2, kIo = 3 };

int axis_from(const std::string& s) {
    if (s == "x" || s == "0") return 0;
    if (s == "y" || s == "1") return 1;
    if (s == "z" || s == "2") return 2;
    throw std::invalid_argument("axis must be x, y or z");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic star-convex instance segmentation volumes"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a dataset of augmented samples");
    std::string config_path, out_dir, mode, stop_after;
    std::optional<std::uint64_t> seed, first_index;
    std::optional<int> samples, workers;
    gen->add_option("--config", config_path, "JSON config file (defaults when omitted)");
    gen->add_option("--seed", seed, "Master seed");
    gen->add_option("--samples", samples, "Number of samples");
    gen->add_option("--first-index", first_index, "Index of the first sample");
    gen->add_option("--workers", workers, "Worker threads");
    gen->add_option("--out", out_dir, "Output directory");
    gen->add_option("--mode", mode, "Generator mode")
        ->check(CLI::IsMember({"mix", "brightfg-plainbg", "randfg-plainbg", "randfg-perlinbg"}));
    gen->add_option("--stop-after", stop_after, "Emit samples augmented only up to this stage");

    auto* dump = app.add_subcommand("dump-config", "Print the full config (defaults or a file with defaults filled)");
    std::string dump_path;
    dump->add_option("--config", dump_path, "JSON config file");

    auto* ev = app.add_subcommand("evaluate", "Score predicted labels against ground truth");
    std::string pred, gt, report_out;
    ev->add_option("--pred", pred, "Predicted label volume")->required();
    ev->add_option("--gt", gt, "Ground-truth label volume")->required();
    ev->add_option("--out", report_out, "Report file (tab-separated)");

    auto* pv = app.add_subcommand("preview", "Write a PNG of one slice: image left, labels right");
    std::string sample, axis = "z", png_out;
    std::optional<int> index;
    pv->add_option("--sample", sample, "Sample image file, label file, or stem")->required();
    pv->add_option("--axis", axis, "x, y or z");
    pv->add_option("--index", index, "Slice index (default: middle)");
    pv->add_option("--out", png_out, "PNG path");

    auto* ver = app.add_subcommand("verify", "Check files against manifest digests");
    std::string manifest;
    ver->add_option("--manifest", manifest, "Manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            GeneratorConfig cfg = config_path.empty() ? GeneratorConfig{} : load_config(config_path);
            if (seed) cfg.master_seed = *seed;
            if (samples) cfg.n_samples = *samples;
            if (first_index) cfg.first_index = *first_index;
            if (workers) cfg.workers = *workers;
            if (!out_dir.empty()) cfg.output.directory = out_dir;
            if (!mode.empty()) cfg.generator_mode = generator_mode_from_string(mode);
            if (!stop_after.empty()) {
                try {
                    cfg.stop_after = stage_from_string(stop_after);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("stop_after: ") + e.what());
                }
            }
            cfg.validate();
            const auto t0 = std::chrono::steady_clock::now();
            const DatasetManifest m = generate_dataset(cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << "wrote " << m.samples.size() << " samples to " << cfg.output.directory << " ("
                      << manifest_filename(cfg) << ") in " << secs << " s\n";
            for (const auto& f : m.failures) std::cerr << "sample " << f.index << " failed: " << f.error << "\n";
            return m.failures.empty() ? kOk : kPartial;
        }
        if (*dump) {
            std::cout << dump_config(dump_path.empty() ? GeneratorConfig{} : load_config(dump_path));
            return kOk;
        }
        if (*ev) {
            const MatchReport r = evaluate_files(pred, gt);
            write_report(std::cout, r);
            if (!report_out.empty()) {
                std::ofstream out(report_out);
                if (!out) throw IoError(report_out + ": cannot open for writing");
                write_report(out, r);
                if (!out) throw IoError(report_out + ": write failed");
            }
            return kOk;
        }
        if (*pv) {
            const SamplePaths paths = resolve_sample(sample);
            const Image img = read_image(paths.image);
            const LabelVolume lab = read_labels(paths.labels);
            const int a = axis_from(axis);
            const int i = index ? *index : img.dims()[a] / 2;
            const PreviewImage p = render_preview(img, lab, a, i);
            if (png_out.empty()) {
                std::string stem = paths.image.substr(0, paths.image.rfind("_image"));
                png_out = stem + "_preview_" + axis + std::to_string(i) + ".png";
            }
            write_png(png_out, p.width, p.height, 3, p.rgb);
            std::cout << png_out << "\n";
            return kOk;
        }
        if (*ver) {
            const VerifyResult r = verify_manifest(manifest);
            for (const auto& f : r.missing) std::cerr << "missing: " << f << "\n";
            for (const auto& f : r.mismatched) std::cerr << "digest mismatch: " << f << "\n";
            std::cout << r.checked << " files checked, " << r.missing.size() << " missing, " << r.mismatched.size()
                      << " mismatched\n";
            return r.ok() ? kOk : kPartial;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}

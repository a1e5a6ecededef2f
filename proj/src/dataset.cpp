#include "anystar/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include "anystar/io.hpp"
#include "anystar/rng.hpp"
#include "anystar/starconvex.hpp"
#include "json.hpp"

namespace anystar {

namespace fs = std::filesystem;
using json = nlohmann::json;

GeneratedSample generate_sample(const GeneratorConfig& cfg, std::uint64_t index) {
    const LabelVolume labels = synthesize_labels(cfg.labelgen, stream_key(cfg.master_seed, index, "labels"));
    Synthesis syn =
        synthesize(labels, cfg.generator_mode, cfg.appearance, stream_key(cfg.master_seed, index, "appearance"));
    PipelineTrace trace;
    GeneratedSample out;
    out.sample = apply_pipeline(JointSample{std::move(syn.image), labels}, cfg.augment,
                                stream_key(cfg.master_seed, index, "augment"), cfg.stop_after, &trace);
    out.background = syn.background;
    out.fired = std::move(trace.fired);
    return out;
}

// Manifest (de)serialization

namespace {

json file_json(const FileRecord& f) { return {{"path", f.path}, {"sha256", f.sha256}}; }

FileRecord file_from(const json& j) { return FileRecord{j.at("path").get<std::string>(), j.at("sha256").get<std::string>()}; }

const char* volume_ext(const OutputConfig& o) {
    if (o.format == VolumeFormat::Raw) return ".raw";
    return o.compression ? ".nii.gz" : ".nii";
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
    json samples = json::array();
    for (const auto& s : m.samples) {
        json files = {{"image", file_json(s.image)}, {"labels", file_json(s.labels)}};
        if (s.encoding) files["encoding"] = file_json(*s.encoding);
        json rec = {{"index", s.index},
                    {"master_seed", s.master_seed},
                    {"generator_mode", to_string(s.generator_mode)},
                    {"background_mode", to_string(s.background_mode)},
                    {"instances", s.instances},
                    {"files", files}};
        if (s.preview) rec["preview"] = *s.preview;
        samples.push_back(rec);
    }
    json failures = json::array();
    for (const auto& f : m.failures) failures.push_back({{"index", f.index}, {"error", f.error}});
    json j = {{"tool_version", m.tool_version},
              {"config", json::parse(dump_config(m.config))},
              {"samples", samples},
              {"failures", failures}};
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
    DatasetManifest m;
    try {
        const json j = json::parse(text);
        m.tool_version = j.at("tool_version").get<std::string>();
        m.config = parse_config(j.at("config").dump());
        for (const auto& r : j.at("samples")) {
            SampleRecord s;
            s.index = r.at("index").get<std::uint64_t>();
            s.master_seed = r.at("master_seed").get<std::uint64_t>();
            s.generator_mode = generator_mode_from_string(r.at("generator_mode").get<std::string>());
            s.background_mode = background_mode_from_string(r.at("background_mode").get<std::string>());
            s.instances = r.at("instances").get<int>();
            const json& files = r.at("files");
            s.image = file_from(files.at("image"));
            s.labels = file_from(files.at("labels"));
            if (files.contains("encoding")) s.encoding = file_from(files.at("encoding"));
            if (r.contains("preview")) s.preview = r.at("preview").get<std::string>();
            m.samples.push_back(std::move(s));
        }
        for (const auto& f : j.at("failures")) {
            m.failures.push_back({f.at("index").get<std::uint64_t>(), f.at("error").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::string manifest_filename(const GeneratorConfig& cfg) {
    if (cfg.first_index == 0) return "manifest.json";
    const std::uint64_t last = cfg.first_index + static_cast<std::uint64_t>(cfg.n_samples) - 1;
    return "manifest_" + std::to_string(cfg.first_index) + "_" + std::to_string(last) + ".json";
}

std::string sample_file_stem(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%06llu", static_cast<unsigned long long>(index));
    return buf;
}

DatasetManifest generate_dataset(const GeneratorConfig& cfg, const SampleFn& make) {
    cfg.validate();
    const fs::path dir(cfg.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string() + ": cannot create output directory: " + ec.message());

    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    std::vector<std::optional<SampleRecord>> records(n);
    std::vector<std::optional<FailureRecord>> failures(n);
    std::vector<std::string> written;
    std::mutex written_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::string io_error;
    std::mutex error_mutex;

    const std::string ext = volume_ext(cfg.output);
    const RaySet rays = make_rays(cfg.star.n_rays);

    auto note = [&](const fs::path& p) {
        std::lock_guard<std::mutex> lock(written_mutex);
        written.push_back(p.string());
        if (p.extension() == ".raw") written.push_back(p.string() + ".json");
    };

    auto work = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::size_t slot = next.fetch_add(1);
            if (slot >= n) return;
            const std::uint64_t index = cfg.first_index + slot;
            const std::string stem = sample_file_stem(index);
            try {
                GeneratedSample g = make(cfg, index);
                SampleRecord rec;
                rec.index = index;
                rec.master_seed = cfg.master_seed;
                rec.generator_mode = cfg.generator_mode;
                rec.background_mode = g.background;
                rec.instances = count_instances(g.sample.labels);
                auto emit = [&](const std::string& suffix, auto&& writer) {
                    const std::string name = stem + suffix + ext;
                    const fs::path p = dir / name;
                    note(p);
                    writer(p.string());
                    return FileRecord{name, sha256_file(p.string())};
                };
                rec.image = emit("_image", [&](const std::string& p) { write_image(p, g.sample.image); });
                rec.labels = emit("_labels", [&](const std::string& p) { write_labels(p, g.sample.labels); });
                if (cfg.output.emit_encodings) {
                    const StarEncoding enc = encode(g.sample.labels, rays);
                    rec.encoding = emit("_encoding", [&](const std::string& p) { write_encoding(p, enc); });
                }
                if (cfg.output.emit_previews) {
                    const std::string name = stem + "_preview.png";
                    const fs::path p = dir / name;
                    const PreviewImage pv =
                        render_preview(g.sample.image, g.sample.labels, 2, g.sample.labels.nz() / 2);
                    note(p);
                    write_png(p.string(), pv.width, pv.height, 3, pv.rgb);
                    rec.preview = name;
                }
                records[slot] = std::move(rec);
            } catch (const IoError& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (io_error.empty()) io_error = e.what();
                abort = true;
                return;
            } catch (const std::exception& e) {
                failures[slot] = FailureRecord{index, e.what()};
            }
        }
    };

    const int nthreads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(n)));
    if (nthreads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    const fs::path manifest_path = dir / manifest_filename(cfg);
    const fs::path tmp = fs::path(manifest_path.string() + ".tmp");
    auto cleanup = [&] {
        std::error_code ignore;
        for (const auto& p : written) fs::remove(p, ignore);
        fs::remove(tmp, ignore);
    };
    if (abort) {
        cleanup();
        throw IoError(io_error);
    }

    DatasetManifest m;
    m.config = cfg;
    for (auto& r : records)
        if (r) m.samples.push_back(std::move(*r));
    for (auto& f : failures)
        if (f) m.failures.push_back(std::move(*f));
    const std::string text = manifest_to_json(m);
    try {
        write_file(tmp.string(), std::vector<std::uint8_t>(text.begin(), text.end()));
        fs::rename(tmp, manifest_path, ec);
        if (ec) throw IoError(manifest_path.string() + ": " + ec.message());
    } catch (const IoError&) {
        cleanup();
        throw;
    }
    return m;
}

VerifyResult verify_manifest(const std::string& manifest_path) {
    const auto bytes = read_file(manifest_path);
    const DatasetManifest m = manifest_from_json(std::string(bytes.begin(), bytes.end()));
    const fs::path base = fs::path(manifest_path).parent_path();
    VerifyResult r;
    auto check = [&](const FileRecord& f) {
        const fs::path p = base / f.path;
        ++r.checked;
        if (!fs::exists(p)) {
            r.missing.push_back(f.path);
            return;
        }
        if (file_kind(p.string()) == FileKind::Raw && !fs::exists(p.string() + ".json")) {
            r.missing.push_back(f.path + ".json");
            return;
        }
        if (sha256_file(p.string()) != f.sha256) r.mismatched.push_back(f.path);
    };
    for (const auto& s : m.samples) {
        check(s.image);
        check(s.labels);
        if (s.encoding) check(*s.encoding);
    }
    return r;
}

MatchReport evaluate_files(const std::string& pred_path, const std::string& gt_path) {
    const LabelVolume pred = read_labels(pred_path);
    const LabelVolume gt = read_labels(gt_path);
    return score_curve(pred, gt);
}

// Preview

std::array<std::uint8_t, 3> label_color(Label id) {
    if (id == 0) return {0, 0, 0};
    const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(id));
    return {static_cast<std::uint8_t>(64 + (h & 0xffff) % 192), static_cast<std::uint8_t>(64 + ((h >> 16) & 0xffff) % 192),
            static_cast<std::uint8_t>(64 + ((h >> 32) & 0xffff) % 192)};
}

PreviewImage render_preview(const Image& image, const LabelVolume& labels, int axis, int index) {
    if (image.dims() != labels.dims()) throw std::invalid_argument("preview: image and labels differ in dims");
    if (axis < 0 || axis > 2) throw std::invalid_argument("preview: axis must be 0, 1 or 2");
    const Dims& d = image.dims();
    if (index < 0 || index >= d[axis]) {
        throw std::invalid_argument("preview: index " + std::to_string(index) + " out of range [0, " +
                                    std::to_string(d[axis]) + ")");
    }
    const int ua = axis == 0 ? 1 : 0;
    const int va = axis == 2 ? 1 : 2;
    const int w = d[ua], h = d[va];
    PreviewImage out;
    out.width = 2 * w;
    out.height = h;
    out.rgb.assign(std::size_t(out.width) * std::size_t(h) * 3, 0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            std::array<int, 3> p{};
            p[axis] = index;
            p[ua] = u;
            p[va] = v;
            const float x = std::clamp(image(p[0], p[1], p[2]), 0.0f, 1.0f);
            const auto g = static_cast<std::uint8_t>(std::lround(x * 255.0f));
            const auto c = label_color(labels(p[0], p[1], p[2]));
            std::uint8_t* left = out.rgb.data() + (std::size_t(v) * std::size_t(out.width) + std::size_t(u)) * 3;
            std::uint8_t* right = left + std::size_t(w) * 3;
            left[0] = left[1] = left[2] = g;
            right[0] = c[0];
            right[1] = c[1];
            right[2] = c[2];
        }
    return out;
}

SamplePaths resolve_sample(const std::string& sample) {
    for (const char* ext : {".nii.gz", ".nii", ".raw"}) {
        for (const char* tag : {"_image", "_labels"}) {
            const std::string suffix = std::string(tag) + ext;
            if (sample.size() > suffix.size() && sample.compare(sample.size() - suffix.size(), suffix.size(), suffix) == 0) {
                const std::string stem = sample.substr(0, sample.size() - suffix.size());
                return {stem + "_image" + ext, stem + "_labels" + ext};
            }
        }
    }
    for (const char* ext : {".nii.gz", ".nii", ".raw"}) {
        SamplePaths p{sample + "_image" + ext, sample + "_labels" + ext};
        if (fs::exists(p.image) && fs::exists(p.labels)) return p;
    }
    throw IoError(sample + ": no sample image/labels pair found");
}

}  // namespace anystar

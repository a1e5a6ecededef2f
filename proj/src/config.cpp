#include "anystar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace anystar {

using json = nlohmann::json;

const char* to_string(VolumeFormat f) { return f == VolumeFormat::Raw ? "raw" : "nifti"; }

VolumeFormat volume_format_from_string(const std::string& s) {
    if (s == "nifti") return VolumeFormat::Nifti;
    if (s == "raw") return VolumeFormat::Raw;
    throw std::invalid_argument("unknown volume format '" + s + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

// Reads the keys of one JSON object; finish() rejects keys nobody asked for.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    template <typename T, typename F>
    void field(const char* key, T& out, F read) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it != j_.end()) read(*it, child(key), out);
    }

    std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) fail(path_.empty() ? k : path_ + "." + k, "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void rd(const json& j, const std::string& path, double& out) {
    if (!j.is_number()) fail(path, "expected a number");
    out = j.get<double>();
}

void rd(const json& j, const std::string& path, int& out) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < INT32_MIN || v > INT32_MAX) fail(path, "integer out of range");
    out = static_cast<int>(v);
}

void rd(const json& j, const std::string& path, std::uint64_t& out) {
    if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
    out = j.get<std::uint64_t>();
}

void rd(const json& j, const std::string& path, bool& out) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    out = j.get<bool>();
}

void rd(const json& j, const std::string& path, std::string& out) {
    if (!j.is_string()) fail(path, "expected a string");
    out = j.get<std::string>();
}

template <typename T, std::size_t N>
void rd(const json& j, const std::string& path, std::array<T, N>& out) {
    if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N));
    for (std::size_t i = 0; i < N; ++i) rd(j[i], path + "[" + std::to_string(i) + "]", out[i]);
}

template <typename E, typename Parse>
void rd_enum(const json& j, const std::string& path, E& out, Parse parse) {
    if (!j.is_string()) fail(path, "expected a string");
    try {
        out = parse(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

void rd(const json& j, const std::string& path, GeneratorMode& out) {
    rd_enum(j, path, out, generator_mode_from_string);
}
void rd(const json& j, const std::string& path, VolumeFormat& out) {
    rd_enum(j, path, out, volume_format_from_string);
}
void rd(const json& j, const std::string& path, NoiseFamily& out) {
    rd_enum(j, path, out, noise_family_from_string);
}

void rd(const json& j, const std::string& path, std::optional<PadMode>& out) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "random")) {
        out.reset();
        return;
    }
    PadMode m{};
    rd_enum(j, path, m, pad_mode_from_string);
    out = m;
}

void rd(const json& j, const std::string& path, std::optional<Stage>& out) {
    if (j.is_null()) {
        out.reset();
        return;
    }
    Stage s{};
    rd_enum(j, path, s, stage_from_string);
    out = s;
}

void rd(const json& j, const std::string& path, std::vector<NoiseFamily>& out) {
    if (!j.is_array()) fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
        NoiseFamily f{};
        rd(j[i], path + "[" + std::to_string(i) + "]", f);
        out.push_back(f);
    }
}

void rd(const json& j, const std::string& path, PerlinSpec& s);
void rd(const json& j, const std::string& path, LabelGenConfig& c);
void rd(const json& j, const std::string& path, AppearanceConfig& c);
void rd(const json& j, const std::string& path, CropConfig& c);
void rd(const json& j, const std::string& path, AffineConfig& c);
void rd(const json& j, const std::string& path, BiasFieldConfig& c);
void rd(const json& j, const std::string& path, KSpaceSpikeConfig& c);
void rd(const json& j, const std::string& path, GibbsConfig& c);
void rd(const json& j, const std::string& path, SharpenConfig& c);
void rd(const json& j, const std::string& path, GammaConfig& c);
void rd(const json& j, const std::string& path, CutoutConfig& c);
void rd(const json& j, const std::string& path, AxisBlurConfig& c);
void rd(const json& j, const std::string& path, FlipRot90Config& c);
void rd(const json& j, const std::string& path, ElasticConfig& c);
void rd(const json& j, const std::string& path, EdgeZeroPadConfig& c);
void rd(const json& j, const std::string& path, NoiseConfig& c);
void rd(const json& j, const std::string& path, AugmentConfig& c);
void rd(const json& j, const std::string& path, StarConfig& c);
void rd(const json& j, const std::string& path, OutputConfig& c);

auto plain = [](const json& j, const std::string& path, auto& out) { rd(j, path, out); };

void rd(const json& j, const std::string& path, PerlinSpec& s) {
    Obj o(j, path);
    o.field("lattice_period", s.lattice_period, plain);
    o.field("octaves", s.octaves, plain);
    o.field("persistence", s.persistence, plain);
    o.field("seed", s.seed, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, LabelGenConfig& c) {
    Obj o(j, path);
    o.field("grid_shape", c.grid_shape, plain);
    o.field("base_radius", c.base_radius, plain);
    o.field("jitter_frac", c.jitter_frac, plain);
    o.field("scale_range", c.scale_range, plain);
    o.field("removal_frac_max", c.removal_frac_max, plain);
    o.field("perlin", c.perlin, plain);
    o.field("noise_gain", c.noise_gain, plain);
    o.field("canvas_dims", c.canvas_dims, plain);
    o.field("output_dims", c.output_dims, plain);
    o.field("pad_frac_range", c.pad_frac_range, plain);
    o.field("pad_mode", c.pad_mode, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, AppearanceConfig& c) {
    Obj o(j, path);
    o.field("mean_range", c.mean_range, plain);
    o.field("std_range", c.std_range, plain);
    o.field("max_background_shapes", c.max_background_shapes, plain);
    o.field("shape_perlin", c.shape_perlin, plain);
    o.field("shape_control_spacing", c.shape_control_spacing, plain);
    o.field("shape_max_disp", c.shape_max_disp, plain);
    o.field("texture_perlin", c.texture_perlin, plain);
    o.field("texture_strength_range", c.texture_strength_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, CropConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("target", c.target, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, AffineConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("max_translation", c.max_translation, plain);
    o.field("max_rotation_deg", c.max_rotation_deg, plain);
    o.field("scale_range", c.scale_range, plain);
    o.field("max_shear", c.max_shear, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, BiasFieldConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("coef_max", c.coef_max, plain);
    o.field("order", c.order, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, KSpaceSpikeConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("count_range", c.count_range, plain);
    o.field("factor_range", c.factor_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, GibbsConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("cutoff_range", c.cutoff_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, SharpenConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("alpha_range", c.alpha_range, plain);
    o.field("sigma", c.sigma, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, GammaConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("gamma_range", c.gamma_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, CutoutConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("count_range", c.count_range, plain);
    o.field("size_range", c.size_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, AxisBlurConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("sigma_range", c.sigma_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, FlipRot90Config& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, ElasticConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("control_spacing", c.control_spacing, plain);
    o.field("max_disp", c.max_disp, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, EdgeZeroPadConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("width_range", c.width_range, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, NoiseConfig& c) {
    Obj o(j, path);
    o.field("p", c.p, plain);
    o.field("families", c.families, plain);
    o.field("level_range", c.level_range, plain);
    o.field("poisson_lambda", c.poisson_lambda, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, AugmentConfig& c) {
    Obj o(j, path);
    o.field("crop", c.crop, plain);
    o.field("affine", c.affine, plain);
    o.field("bias_field", c.bias_field, plain);
    o.field("kspace_spike", c.kspace_spike, plain);
    o.field("gibbs", c.gibbs, plain);
    o.field("sharpen", c.sharpen, plain);
    o.field("gamma", c.gamma, plain);
    o.field("cutout", c.cutout, plain);
    o.field("axis_blur", c.axis_blur, plain);
    o.field("flip_rot90", c.flip_rot90, plain);
    o.field("elastic", c.elastic, plain);
    o.field("edge_zero_pad", c.edge_zero_pad, plain);
    o.field("terminal_cutout", c.terminal_cutout, plain);
    o.field("noise", c.noise, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, StarConfig& c) {
    Obj o(j, path);
    o.field("n_rays", c.n_rays, plain);
    o.field("prob_thresh", c.prob_thresh, plain);
    o.field("nms_thresh", c.nms_thresh, plain);
    o.field("grid_step", c.grid_step, plain);
    o.finish();
}

void rd(const json& j, const std::string& path, OutputConfig& c) {
    Obj o(j, path);
    o.field("directory", c.directory, plain);
    o.field("format", c.format, plain);
    o.field("compression", c.compression, plain);
    o.field("emit_encodings", c.emit_encodings, plain);
    o.field("emit_previews", c.emit_previews, plain);
    o.finish();
}

void rd(const json& j, GeneratorConfig& c) {
    Obj o(j, "");
    o.field("master_seed", c.master_seed, plain);
    o.field("n_samples", c.n_samples, plain);
    o.field("first_index", c.first_index, plain);
    o.field("workers", c.workers, plain);
    o.field("generator_mode", c.generator_mode, plain);
    o.field("stop_after", c.stop_after, plain);
    o.field("labelgen", c.labelgen, plain);
    o.field("appearance", c.appearance, plain);
    o.field("augment", c.augment, plain);
    o.field("star", c.star, plain);
    o.field("output", c.output, plain);
    o.finish();
}

// Writers

json wr(const PerlinSpec& s) {
    return {{"lattice_period", s.lattice_period},
            {"octaves", s.octaves},
            {"persistence", s.persistence},
            {"seed", s.seed}};
}

json wr(const LabelGenConfig& c) {
    return {{"grid_shape", c.grid_shape},
            {"base_radius", c.base_radius},
            {"jitter_frac", c.jitter_frac},
            {"scale_range", c.scale_range},
            {"removal_frac_max", c.removal_frac_max},
            {"perlin", wr(c.perlin)},
            {"noise_gain", c.noise_gain},
            {"canvas_dims", c.canvas_dims},
            {"output_dims", c.output_dims},
            {"pad_frac_range", c.pad_frac_range},
            {"pad_mode", c.pad_mode ? json(to_string(*c.pad_mode)) : json("random")}};
}

json wr(const AppearanceConfig& c) {
    return {{"mean_range", c.mean_range},
            {"std_range", c.std_range},
            {"max_background_shapes", c.max_background_shapes},
            {"shape_perlin", wr(c.shape_perlin)},
            {"shape_control_spacing", c.shape_control_spacing},
            {"shape_max_disp", c.shape_max_disp},
            {"texture_perlin", wr(c.texture_perlin)},
            {"texture_strength_range", c.texture_strength_range}};
}

json wr(const CutoutConfig& c) {
    return {{"p", c.p}, {"count_range", c.count_range}, {"size_range", c.size_range}};
}

json wr(const AugmentConfig& c) {
    json families = json::array();
    for (auto f : c.noise.families) families.push_back(to_string(f));
    return {
        {"crop", {{"p", c.crop.p}, {"target", c.crop.target}}},
        {"affine",
         {{"p", c.affine.p},
          {"max_translation", c.affine.max_translation},
          {"max_rotation_deg", c.affine.max_rotation_deg},
          {"scale_range", c.affine.scale_range},
          {"max_shear", c.affine.max_shear}}},
        {"bias_field", {{"p", c.bias_field.p}, {"coef_max", c.bias_field.coef_max}, {"order", c.bias_field.order}}},
        {"kspace_spike",
         {{"p", c.kspace_spike.p},
          {"count_range", c.kspace_spike.count_range},
          {"factor_range", c.kspace_spike.factor_range}}},
        {"gibbs", {{"p", c.gibbs.p}, {"cutoff_range", c.gibbs.cutoff_range}}},
        {"sharpen", {{"p", c.sharpen.p}, {"alpha_range", c.sharpen.alpha_range}, {"sigma", c.sharpen.sigma}}},
        {"gamma", {{"p", c.gamma.p}, {"gamma_range", c.gamma.gamma_range}}},
        {"cutout", wr(c.cutout)},
        {"axis_blur", {{"p", c.axis_blur.p}, {"sigma_range", c.axis_blur.sigma_range}}},
        {"flip_rot90", {{"p", c.flip_rot90.p}}},
        {"elastic",
         {{"p", c.elastic.p}, {"control_spacing", c.elastic.control_spacing}, {"max_disp", c.elastic.max_disp}}},
        {"edge_zero_pad", {{"p", c.edge_zero_pad.p}, {"width_range", c.edge_zero_pad.width_range}}},
        {"terminal_cutout", wr(c.terminal_cutout)},
        {"noise",
         {{"p", c.noise.p},
          {"families", families},
          {"level_range", c.noise.level_range},
          {"poisson_lambda", c.noise.poisson_lambda}}},
    };
}

json wr(const GeneratorConfig& c) {
    return {
        {"master_seed", c.master_seed},
        {"n_samples", c.n_samples},
        {"first_index", c.first_index},
        {"workers", c.workers},
        {"generator_mode", to_string(c.generator_mode)},
        {"stop_after", c.stop_after ? json(to_string(*c.stop_after)) : json(nullptr)},
        {"labelgen", wr(c.labelgen)},
        {"appearance", wr(c.appearance)},
        {"augment", wr(c.augment)},
        {"star",
         {{"n_rays", c.star.n_rays},
          {"prob_thresh", c.star.prob_thresh},
          {"nms_thresh", c.star.nms_thresh},
          {"grid_step", c.star.grid_step}}},
        {"output",
         {{"directory", c.output.directory},
          {"format", to_string(c.output.format)},
          {"compression", c.output.compression},
          {"emit_encodings", c.output.emit_encodings},
          {"emit_previews", c.output.emit_previews}}},
    };
}

template <typename F>
void rethrow_keyed(const std::string& prefix, F f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(prefix.empty() ? std::string(e.what()) : prefix + ": " + e.what());
    }
}

}  // namespace

void GeneratorConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples: must be >= 1");
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    rethrow_keyed("labelgen.perlin", [&] { labelgen.perlin.validate(); });
    rethrow_keyed("appearance.shape_perlin", [&] { appearance.shape_perlin.validate(); });
    rethrow_keyed("appearance.texture_perlin", [&] { appearance.texture_perlin.validate(); });
    rethrow_keyed("", [&] { labelgen.validate(); });
    rethrow_keyed("", [&] { appearance.validate(); });
    rethrow_keyed("", [&] { augment.validate(); });
    for (int a = 0; a < 3; ++a) {
        if (augment.crop.target[a] > labelgen.output_dims[a]) {
            throw ConfigError("augment.crop.target: must not exceed labelgen.output_dims");
        }
    }
    if (star.n_rays < 4) throw ConfigError("star.n_rays: must be >= 4");
    if (!(star.prob_thresh >= 0.0 && star.prob_thresh <= 1.0)) throw ConfigError("star.prob_thresh: must lie in [0, 1]");
    if (!(star.nms_thresh >= 0.0 && star.nms_thresh <= 1.0)) throw ConfigError("star.nms_thresh: must lie in [0, 1]");
    if (star.grid_step < 1) throw ConfigError("star.grid_step: must be >= 1");
    if (output.directory.empty()) throw ConfigError("output.directory: must not be empty");
}

GeneratorConfig parse_config(const std::string& text) {
    GeneratorConfig cfg;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<config>: parse error: ") + e.what());
    }
    rd(j, cfg);
    cfg.validate();
    return cfg;
}

GeneratorConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const GeneratorConfig& cfg) { return wr(cfg).dump(2) + "\n"; }

}  // namespace anystar

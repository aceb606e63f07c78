#include "bvq/config.hpp"

#include <fstream>
#include <sstream>

#include "bvq/hash.hpp"

namespace bvq {

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no_beam") return Variant::NoBeam;
    if (s == "no_selftrain") return Variant::NoSelfTrain;
    if (s == "mse_scorer") return Variant::MseScorer;
    if (s == "vq_plain") return Variant::VqPlain;
    if (s == "baseline") return Variant::Baseline;
    config_error("unknown variant '" + s + "'");
}

std::string variant_to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoBeam: return "no_beam";
        case Variant::NoSelfTrain: return "no_selftrain";
        case Variant::MseScorer: return "mse_scorer";
        case Variant::VqPlain: return "vq_plain";
        case Variant::Baseline: return "baseline";
    }
    return "?";
}

bool variant_uses_beam_eval(Variant v) { return variant_wiring(v).beam_eval; }

VariantWiring variant_wiring(Variant v) {
    VariantWiring w;
    switch (v) {
        case Variant::Full:
            break;
        case Variant::NoBeam:  // beam width forced to 1, filtering retained
            w.force_beam_width_1 = true;
            w.beam_eval = false;
            break;
        case Variant::NoSelfTrain:  // filtering disabled, beam inference only
            w.self_training = false;
            break;
        case Variant::MseScorer:  // filter by MSE against the model's own greedy rollout
            w.scorer_greedy_reference = true;
            break;
        case Variant::VqPlain:
            w.self_training = false;
            w.force_beam_width_1 = true;
            w.beam_eval = false;
            break;
        case Variant::Baseline:
            w.bypass_quantization = true;
            w.self_training = false;
            w.force_beam_width_1 = true;
            w.beam_eval = false;
            break;
    }
    return w;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        config_error("config key '" + key + "': expected unsigned integer, got '" + v + "'");
    }
}

uint32_t parse_u32(const std::string& key, const std::string& v) {
    const uint64_t out = parse_u64(key, v);
    if (out > 0xffffffffull) config_error("config key '" + key + "': value out of range");
    return static_cast<uint32_t>(out);
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        config_error("config key '" + key + "': expected number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    config_error("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<uint32_t> parse_u32_list(const std::string& key, const std::string& v) {
    std::vector<uint32_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_u32(key, item));
    }
    if (out.empty()) config_error("config key '" + key + "': empty list");
    return out;
}

std::string join_u32_list(const std::vector<uint32_t>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

std::string fmt_f64(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "data" && section != "model" && section != "bank" && section != "beam" &&
                section != "train")
                config_error("config: unknown section '" + section + "'");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            config_error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (section == "data") {
            if (key == "grid") cfg.data.grid = parse_u32(qual, val);
            else if (key == "steps") cfg.data.steps = parse_u32(qual, val);
            else if (key == "trajectories") cfg.data.trajectories = parse_u32(qual, val);
            else if (key == "t_in") cfg.data.t_in = parse_u32(qual, val);
            else if (key == "t_out") cfg.data.t_out = parse_u32(qual, val);
            else if (key == "stride") cfg.data.stride = parse_u32(qual, val);
            else if (key == "cfl") cfg.data.cfl = parse_f64(qual, val);
            else if (key == "gravity") cfg.data.gravity = parse_f64(qual, val);
            else if (key == "dx") cfg.data.dx = parse_f64(qual, val);
            else if (key == "dy") cfg.data.dy = parse_f64(qual, val);
            else if (key == "train_frac") cfg.data.train_frac = parse_f64(qual, val);
            else if (key == "val_frac") cfg.data.val_frac = parse_f64(qual, val);
            else if (key == "seed") cfg.data.seed = parse_u64(qual, val);
            else config_error("config: unknown key '" + qual + "'");
        } else if (section == "model") {
            if (key == "enc_widths") cfg.model.enc_widths = parse_u32_list(qual, val);
            else if (key == "dec_widths") cfg.model.dec_widths = parse_u32_list(qual, val);
            else if (key == "chunk") cfg.model.chunk = parse_u32(qual, val);
            else if (key == "sigmoid_tokens") cfg.model.sigmoid_tokens = parse_bool(qual, val);
            else config_error("config: unknown key '" + qual + "'");
        } else if (section == "bank") {
            if (key == "size") cfg.bank.size = parse_u32(qual, val);
            else if (key == "dim") cfg.bank.dim = parse_u32(qual, val);
            else config_error("config: unknown key '" + qual + "'");
        } else if (section == "beam") {
            if (key == "k") cfg.beam.k = parse_u32(qual, val);
            else if (key == "scorer") cfg.beam.scorer = val;
            else if (key == "w_div") cfg.beam.w_div = parse_f64(qual, val);
            else if (key == "w_spec") cfg.beam.w_spec = parse_f64(qual, val);
            else config_error("config: unknown key '" + qual + "'");
        } else if (section == "train") {
            if (key == "lr") cfg.train.lr = parse_f64(qual, val);
            else if (key == "batch") cfg.train.batch = parse_u32(qual, val);
            else if (key == "epochs") cfg.train.epochs = parse_u32(qual, val);
            else if (key == "e1") cfg.train.e1 = parse_u32(qual, val);
            else if (key == "e2") cfg.train.e2 = parse_u32(qual, val);
            else if (key == "mid_freq") cfg.train.mid_freq = parse_u32(qual, val);
            else if (key == "late_freq") cfg.train.late_freq = parse_u32(qual, val);
            else if (key == "lambda") cfg.train.lambda = parse_f64(qual, val);
            else if (key == "beta") cfg.train.beta = parse_f64(qual, val);
            else if (key == "gamma") cfg.train.gamma = parse_f64(qual, val);
            else if (key == "threshold") cfg.train.threshold = val;
            else if (key == "threshold_value") cfg.train.threshold_value = parse_f64(qual, val);
            else if (key == "max_gen_inputs") cfg.train.max_gen_inputs = parse_u32(qual, val);
            else if (key == "patience") cfg.train.patience = parse_u32(qual, val);
            else if (key == "val_every") cfg.train.val_every = parse_u32(qual, val);
            else if (key == "variant") cfg.train.variant = val;
            else if (key == "seed") cfg.train.seed = parse_u64(qual, val);
            else config_error("config: unknown key '" + qual + "'");
        } else {
            config_error("config line " + std::to_string(lineno) + ": key outside any section");
        }
    }
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (data.grid < 8) config_error("data.grid must be >= 8");
    if (data.trajectories < 1) config_error("data.trajectories must be >= 1");
    if (data.t_in < 1 || data.t_out < 1) config_error("data.t_in and data.t_out must be >= 1");
    if (data.stride < 1) config_error("data.stride must be >= 1");
    if (!(data.cfl > 0.0 && data.cfl < 0.5)) config_error("data.cfl must be in (0, 0.5)");
    if (!(data.dx > 0.0 && data.dy > 0.0)) config_error("data grid spacing must be positive");
    if (!(data.train_frac > 0.0 && data.val_frac > 0.0 && data.train_frac + data.val_frac < 1.0))
        config_error("data split fractions are invalid");

    backbone(3).validate();  // grid divisibility etc., before any work happens
    if (data.t_out % model.chunk != 0)
        config_error("model.chunk " + std::to_string(model.chunk) + " must divide data.t_out " +
                     std::to_string(data.t_out));
    if (bank.size < 1 || bank.dim < 1) config_error("bank dimensions must be >= 1");
    if (beam.k < 1) config_error("beam.k must be >= 1");
    if (beam.k > bank.size) config_error("beam.k exceeds bank size");
    scorer_kind_from_string(beam.scorer);
    if (beam.scorer == "neg_mse_reference")
        config_error("beam.scorer neg_mse_reference is internal to the mse_scorer variant");

    if (!(train.lr > 0.0)) config_error("train.lr must be positive");
    if (train.batch < 1) config_error("train.batch must be >= 1");
    schedule().validate();
    loss_weights().validate();
    if (train.threshold != "quartile" && train.threshold != "constant")
        config_error("train.threshold must be quartile or constant");
    if (train.val_every < 1) config_error("train.val_every must be >= 1");
    variant_from_string(train.variant);
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os << "[data]\n";
    os << "grid = " << data.grid << "\n";
    os << "steps = " << data.steps << "\n";
    os << "trajectories = " << data.trajectories << "\n";
    os << "t_in = " << data.t_in << "\n";
    os << "t_out = " << data.t_out << "\n";
    os << "stride = " << data.stride << "\n";
    os << "cfl = " << fmt_f64(data.cfl) << "\n";
    os << "gravity = " << fmt_f64(data.gravity) << "\n";
    os << "dx = " << fmt_f64(data.dx) << "\n";
    os << "dy = " << fmt_f64(data.dy) << "\n";
    os << "train_frac = " << fmt_f64(data.train_frac) << "\n";
    os << "val_frac = " << fmt_f64(data.val_frac) << "\n";
    os << "seed = " << data.seed << "\n";
    os << "\n[model]\n";
    os << "enc_widths = " << join_u32_list(model.enc_widths) << "\n";
    os << "dec_widths = " << join_u32_list(model.dec_widths) << "\n";
    os << "chunk = " << model.chunk << "\n";
    os << "sigmoid_tokens = " << (model.sigmoid_tokens ? "true" : "false") << "\n";
    os << "\n[bank]\n";
    os << "size = " << bank.size << "\n";
    os << "dim = " << bank.dim << "\n";
    os << "\n[beam]\n";
    os << "k = " << beam.k << "\n";
    os << "scorer = " << beam.scorer << "\n";
    os << "w_div = " << fmt_f64(beam.w_div) << "\n";
    os << "w_spec = " << fmt_f64(beam.w_spec) << "\n";
    os << "\n[train]\n";
    os << "lr = " << fmt_f64(train.lr) << "\n";
    os << "batch = " << train.batch << "\n";
    os << "epochs = " << train.epochs << "\n";
    os << "e1 = " << train.e1 << "\n";
    os << "e2 = " << train.e2 << "\n";
    os << "mid_freq = " << train.mid_freq << "\n";
    os << "late_freq = " << train.late_freq << "\n";
    os << "lambda = " << fmt_f64(train.lambda) << "\n";
    os << "beta = " << fmt_f64(train.beta) << "\n";
    os << "gamma = " << fmt_f64(train.gamma) << "\n";
    os << "threshold = " << train.threshold << "\n";
    os << "threshold_value = " << fmt_f64(train.threshold_value) << "\n";
    os << "max_gen_inputs = " << train.max_gen_inputs << "\n";
    os << "patience = " << train.patience << "\n";
    os << "val_every = " << train.val_every << "\n";
    os << "variant = " << train.variant << "\n";
    os << "seed = " << train.seed << "\n";
    return os.str();
}

std::string ExperimentConfig::config_hash() const { return hash_hex(fnv1a64(canonical_text())); }

BackboneConfig ExperimentConfig::backbone(uint32_t channels) const {
    BackboneConfig b;
    b.t_in = data.t_in;
    b.channels = channels;
    b.h = data.grid;
    b.w = data.grid;
    b.enc_widths = model.enc_widths;
    b.dec_widths = model.dec_widths;
    b.code_dim = bank.dim;
    b.chunk = model.chunk;
    b.sigmoid_tokens = model.sigmoid_tokens;
    b.bypass_quantization = variant_wiring(variant_from_string(train.variant)).bypass_quantization;
    return b;
}

BankConfig ExperimentConfig::bank_config() const { return BankConfig{bank.size, bank.dim}; }

TrainSchedule ExperimentConfig::schedule() const {
    TrainSchedule s;
    s.e1 = train.e1;
    s.e2 = train.e2;
    s.total = train.epochs;
    s.mid_freq = train.mid_freq;
    s.late_freq = train.late_freq;
    return s;
}

LossWeights ExperimentConfig::loss_weights() const { return LossWeights{train.lambda, train.beta, train.gamma}; }

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) config_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream os(path);
    if (!os) data_error("cannot write config '" + path + "'");
    os << cfg.canonical_text();
    if (!os) data_error("write failed for '" + path + "'");
}

}  // namespace bvq

#include "umbra/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace umbra {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_sections(const std::string& text) {
    std::map<std::string, Section> sections;
    std::string current = "";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            sections[current];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        sections[current][key] = val;
    }
    return sections;
}

// Typed readers that consume keys so leftovers can be reported.
struct SectionReader {
    std::string name;
    Section kv;

    std::string str(const char* key, const std::string& def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::string v = it->second;
        kv.erase(it);
        return v;
    }
    double num(const char* key, double def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
            kv.erase(it);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config [" + name + "] " + key + ": not a number: " + it->second);
        }
    }
    int integer(const char* key, int def) {
        const double v = num(key, (double)def);
        const int i = (int)v;
        if ((double)i != v)
            throw ConfigError("config [" + name + "] " + key + ": expected an integer");
        return i;
    }
    std::uint64_t u64(const char* key, std::uint64_t def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::uint64_t v = 0;
        const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
            throw ConfigError("config [" + name + "] " + key + ": expected an unsigned integer");
        kv.erase(it);
        return v;
    }
    bool boolean(const char* key, bool def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::string v = it->second;
        kv.erase(it);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config [" + name + "] " + key + ": expected a boolean, got " + v);
    }
    void done() const {
        if (!kv.empty())
            throw ConfigError("config [" + name + "]: unknown key '" + kv.begin()->first + "'");
    }
};

}  // namespace

void RunConfig::validate() const {
    if (model.embed_dim % model.num_heads != 0)
        throw ConfigError("embed_dim must be divisible by num_heads");
    if (model.num_blocks < 1) throw ConfigError("num_blocks must be >= 1");
    if (mape.w1 <= mape.w2 || mape.w2 <= 0)
        throw ConfigError("mape weights must satisfy w1 > w2 > 0");
    if (train.lr <= 0) throw ConfigError("learning rate must be positive");
    if (train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (train.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (model.patch_size < 1) throw ConfigError("patch_size must be >= 1");
}

RunConfig parse_config_text(const std::string& text) {
    auto sections = parse_sections(text);
    RunConfig cfg;

    for (auto& [name, kv] : sections) {
        SectionReader r{name, std::move(kv)};
        if (name == "dataset") {
            cfg.dataset_root = r.str("root", cfg.dataset_root);
            cfg.eval_resolution = r.integer("eval_resolution", cfg.eval_resolution);
        } else if (name == "model") {
            cfg.model.num_blocks = r.integer("num_blocks", cfg.model.num_blocks);
            cfg.model.num_heads = r.integer("num_heads", cfg.model.num_heads);
            cfg.model.embed_dim = r.integer("embed_dim", cfg.model.embed_dim);
            cfg.model.ffn_ratio = r.num("ffn_ratio", cfg.model.ffn_ratio);
            cfg.model.patch_size = r.integer("patch_size", cfg.model.patch_size);
            cfg.model.global_residual = r.boolean("global_residual", cfg.model.global_residual);
            cfg.model.learned_pos = r.boolean("learned_pos", cfg.model.learned_pos);
        } else if (name == "mape") {
            cfg.mape.w1 = r.num("w1", cfg.mape.w1);
            cfg.mape.w2 = r.num("w2", cfg.mape.w2);
            cfg.mape.trainable_weights = r.boolean("trainable_weights", cfg.mape.trainable_weights);
        } else if (name == "train") {
            cfg.train.lr = r.num("lr", cfg.train.lr);
            cfg.train.epochs = r.integer("epochs", cfg.train.epochs);
            cfg.train.batch_size = r.integer("batch_size", cfg.train.batch_size);
            cfg.train.weight_decay = r.num("weight_decay", cfg.train.weight_decay);
            cfg.train.beta1 = r.num("beta1", cfg.train.beta1);
            cfg.train.beta2 = r.num("beta2", cfg.train.beta2);
            cfg.train.seed = r.u64("seed", cfg.train.seed);
        } else if (name == "run") {
            cfg.variant = embed_variant_from_name(r.str("variant", embed_variant_name(cfg.variant)));
            cfg.out_dir = r.str("out", cfg.out_dir);
            cfg.eval_every = r.integer("eval_every", cfg.eval_every);
            cfg.save_predictions = r.boolean("save_predictions", cfg.save_predictions);
        } else if (!name.empty()) {
            throw ConfigError("config: unknown section [" + name + "]");
        }
        r.done();
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_echo(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "[dataset]\n"
        << "root = " << cfg.dataset_root << "\n"
        << "eval_resolution = " << cfg.eval_resolution << "\n\n"
        << "[model]\n"
        << "num_blocks = " << cfg.model.num_blocks << "\n"
        << "num_heads = " << cfg.model.num_heads << "\n"
        << "embed_dim = " << cfg.model.embed_dim << "\n"
        << "ffn_ratio = " << cfg.model.ffn_ratio << "\n"
        << "patch_size = " << cfg.model.patch_size << "\n"
        << "global_residual = " << (cfg.model.global_residual ? "true" : "false") << "\n"
        << "learned_pos = " << (cfg.model.learned_pos ? "true" : "false") << "\n\n"
        << "[mape]\n"
        << "w1 = " << cfg.mape.w1 << "\n"
        << "w2 = " << cfg.mape.w2 << "\n"
        << "trainable_weights = " << (cfg.mape.trainable_weights ? "true" : "false") << "\n\n"
        << "[train]\n"
        << "lr = " << cfg.train.lr << "\n"
        << "epochs = " << cfg.train.epochs << "\n"
        << "batch_size = " << cfg.train.batch_size << "\n"
        << "weight_decay = " << cfg.train.weight_decay << "\n"
        << "beta1 = " << cfg.train.beta1 << "\n"
        << "beta2 = " << cfg.train.beta2 << "\n"
        << "seed = " << cfg.train.seed << "\n\n"
        << "[run]\n"
        << "variant = " << embed_variant_name(cfg.variant) << "\n"
        << "out = " << cfg.out_dir << "\n"
        << "eval_every = " << cfg.eval_every << "\n"
        << "save_predictions = " << (cfg.save_predictions ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace umbra

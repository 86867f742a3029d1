#ifndef CHERNLAB_CONFIG_HPP
#define CHERNLAB_CONFIG_HPP

#include "chernlab/bubble.hpp"

#include <map>

namespace chernlab {

/// Flat dotted-key configuration: `section.key = value` lines, `#` comments.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    std::string str(const std::string& key) const;
    std::string str_or(const std::string& key, const std::string& def) const;
    double num(const std::string& key) const;
    double num_or(const std::string& key, double def) const;
    long integer_or(const std::string& key, long def) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<double> list_or(const std::string& key, std::vector<double> def) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    const std::map<std::string, std::string>& items() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

/// Everything a CLI run needs, resolved from a Config.
struct Experiment {
    std::shared_ptr<const Domain> domain;
    std::shared_ptr<const HermitianTarget> target;
    MapState initial;
    FlowConfig flow;
    BubbleConfig bubble;
    std::string out_dir = "out";
    uint64_t seed = 1;
};

Experiment build_experiment(const Config& cfg);

/// Initial-map factory shared by the CLI and tests: closed-form ids with
/// parameters (constant, holomorphic_poly, hopf_exp, fs_bubble member, trig_random,
/// snapshot path).
MapState make_initial_map(const Config& cfg, std::shared_ptr<const Domain> dom,
                          std::shared_ptr<const HermitianTarget> tgt, uint64_t seed);

}  // namespace chernlab

#endif

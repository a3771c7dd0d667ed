#include "xpatch/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xpatch/types.hpp"

namespace xpatch::fitness {

std::string to_string(Mode m) { return m == Mode::joint ? "joint" : "sum"; }

Mode parse_mode(const std::string& s) {
    if (s == "joint") return Mode::joint;
    if (s == "sum") return Mode::sum;
    throw ConfigError("fitness_mode must be 'joint' or 'sum', got '" + s + "'");
}

double dis(double f_clean, double f_adv, double thre) {
    if (!(f_clean > thre))
        throw std::invalid_argument("dis: clean score must exceed the threshold");
    return (f_clean - f_adv) / (f_clean - thre);
}

double joint(double dis_vis, double dis_inf, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("joint: lambda must be positive");
    return std::exp(lambda * std::min(dis_vis, dis_inf));
}

double sum_fitness(double dis_vis, double dis_inf) { return dis_vis + dis_inf; }

bool attack_success(double f_vis_adv, double f_inf_adv, double thre) {
    return std::max(f_vis_adv, f_inf_adv) < thre;
}

FitnessValue score(double clean_vis, double adv_vis, double clean_inf, double adv_inf, double thre,
                   double lambda, Mode mode) {
    FitnessValue v;
    v.f_vis_adv = adv_vis;
    v.f_inf_adv = adv_inf;
    v.dis_vis = dis(clean_vis, adv_vis, thre);
    v.dis_inf = dis(clean_inf, adv_inf, thre);
    v.joint = joint(v.dis_vis, v.dis_inf, lambda);
    v.objective = mode == Mode::joint ? v.joint : sum_fitness(v.dis_vis, v.dis_inf);
    return v;
}

FitnessValue degenerate_value() {
    FitnessValue v;
    v.f_vis_adv = 1.0;
    v.f_inf_adv = 1.0;
    v.objective = -std::numeric_limits<double>::infinity();
    v.degenerate = true;
    return v;
}

}  // namespace xpatch::fitness

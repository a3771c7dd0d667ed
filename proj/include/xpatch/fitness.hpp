#pragma once

#include <string>

namespace xpatch::fitness {

inline constexpr double kDefaultLambda = 2.0;
inline constexpr double kDefaultThreshold = 0.7;

enum class Mode { joint, sum };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Score of one candidate shape. `objective` is what selection maximizes:
/// `joint` in joint mode, the plain sum of the progress terms in sum mode.
struct FitnessValue {
    double joint = 1.0;
    double dis_vis = 0.0;
    double dis_inf = 0.0;
    double f_vis_adv = 0.0;
    double f_inf_adv = 0.0;
    double objective = 1.0;
    bool degenerate = false;
};

/// Normalised progress from the clean score toward the threshold.
double dis(double f_clean, double f_adv, double thre);

/// exp(lambda * min(dis_vis, dis_inf))
double joint(double dis_vis, double dis_inf, double lambda);

double sum_fitness(double dis_vis, double dis_inf);

/// Both modalities strictly below the threshold.
bool attack_success(double f_vis_adv, double f_inf_adv, double thre);

FitnessValue score(double clean_vis, double adv_vis, double clean_inf, double adv_inf, double thre,
                   double lambda, Mode mode);

/// Worst possible value; used for shapes that cannot be rendered.
FitnessValue degenerate_value();

}  // namespace xpatch::fitness

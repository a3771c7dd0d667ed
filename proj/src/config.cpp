#include "xpatch/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace xpatch {

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

std::vector<Point2> default_patch_centers(int count) {
    // Nested for small counts so adding a patch never moves the existing ones.
    static const std::vector<Point2> nested{{0.5, 0.35}, {0.5, 0.6}, {0.5, 0.74}};
    if (count <= static_cast<int>(nested.size())) return {nested.begin(), nested.begin() + count};
    std::vector<Point2> out;
    for (int i = 0; i < count; ++i) out.push_back({0.5, 0.25 + 0.5 * (i + 1) / (count + 1)});
    return out;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(population_size >= 4, "population_size must be >= 4");
    require(max_generations >= 0, "max_generations must be >= 0");
    require(lambda > 0, "lambda must be positive");
    require(thre > 0 && thre < 1, "thre must lie in (0, 1)");
    require(patch_count >= 1, "patch_count must be >= 1");
    require(static_cast<int>(patch_centers.size()) == patch_count, "patch_centers must list patch_count entries");
    require(anchors_per_patch >= 4, "anchors_per_patch must be >= 4");
    require(de_F >= 0 && de_F <= 2, "de_F must lie in [0, 2]");
    require(de_CR >= 0 && de_CR <= 1, "de_CR must lie in [0, 1]");
    require(radius_fraction > 0, "radius_fraction must be positive");
    require(inner_fraction > 0 && inner_fraction <= 0.5, "inner_fraction must lie in (0, 0.5]");
    require(outer_shrink > 0 && outer_shrink <= 1, "outer_shrink must lie in (0, 1]");
    require(samples_per_segment >= 2, "samples_per_segment must be >= 2");
    require(jitter_fraction >= 0, "jitter_fraction must be >= 0");
}

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "population_size") population_size = parse_number<int>(key, value);
    else if (key == "max_generations") max_generations = parse_number<int>(key, value);
    else if (key == "lambda") lambda = parse_number<double>(key, value);
    else if (key == "thre") thre = parse_number<double>(key, value);
    else if (key == "patch_count") {
        patch_count = parse_number<int>(key, value);
        // an explicit patch_centers line, if any, comes later and wins
        if (patch_count >= 1) patch_centers = default_patch_centers(patch_count);
    }
    else if (key == "anchors_per_patch") anchors_per_patch = parse_number<int>(key, value);
    else if (key == "de_F") de_F = parse_number<double>(key, value);
    else if (key == "de_CR") de_CR = parse_number<double>(key, value);
    else if (key == "radius_fraction") radius_fraction = parse_number<double>(key, value);
    else if (key == "inner_fraction") inner_fraction = parse_number<double>(key, value);
    else if (key == "outer_shrink") outer_shrink = parse_number<double>(key, value);
    else if (key == "samples_per_segment") samples_per_segment = parse_number<int>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "jitter_fraction") jitter_fraction = parse_number<double>(key, value);
    else if (key == "fitness_mode") fitness_mode = fitness::parse_mode(value);
    else if (key == "translate_mode") {
        if (value == "joint") translate_mode = TranslateMode::joint;
        else if (value == "per_patch") translate_mode = TranslateMode::per_patch;
        else throw ConfigError("translate_mode must be 'joint' or 'per_patch'");
    } else if (key == "patch_centers") {
        patch_centers.clear();
        for (const auto& item : split(value, ';')) {
            auto xy = split(item, ',');
            if (xy.size() != 2) throw ConfigError("patch_centers: expected 'fx,fy;fx,fy;...'");
            patch_centers.push_back({parse_number<double>(key, xy[0]), parse_number<double>(key, xy[1])});
        }
    } else if (key == "cover_visible") {
        auto rgb = split(value, ',');
        if (rgb.size() != 3) throw ConfigError("cover_visible: expected 'r,g,b'");
        for (int k = 0; k < 3; ++k) {
            int v = parse_number<int>(key, rgb[k]);
            if (v < 0 || v > 255) throw ConfigError("cover_visible: channel out of range");
            cover.visible_value[k] = static_cast<std::uint8_t>(v);
        }
    } else if (key == "cover_infrared") {
        int v = parse_number<int>(key, value);
        if (v < 0 || v > 255) throw ConfigError("cover_infrared out of range");
        cover.infrared_value = static_cast<std::uint8_t>(v);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "population_size = " << population_size << '\n'
       << "max_generations = " << max_generations << '\n'
       << "lambda = " << fmt(lambda) << '\n'
       << "thre = " << fmt(thre) << '\n'
       << "patch_count = " << patch_count << '\n'
       << "anchors_per_patch = " << anchors_per_patch << '\n'
       << "de_F = " << fmt(de_F) << '\n'
       << "de_CR = " << fmt(de_CR) << '\n'
       << "radius_fraction = " << fmt(radius_fraction) << '\n'
       << "inner_fraction = " << fmt(inner_fraction) << '\n'
       << "outer_shrink = " << fmt(outer_shrink) << '\n'
       << "patch_centers = ";
    for (std::size_t i = 0; i < patch_centers.size(); ++i)
        os << (i ? ";" : "") << fmt(patch_centers[i].x) << ',' << fmt(patch_centers[i].y);
    os << '\n'
       << "cover_visible = " << int(cover.visible_value[0]) << ',' << int(cover.visible_value[1]) << ','
       << int(cover.visible_value[2]) << '\n'
       << "cover_infrared = " << int(cover.infrared_value) << '\n'
       << "samples_per_segment = " << samples_per_segment << '\n'
       << "fitness_mode = " << fitness::to_string(fitness_mode) << '\n'
       << "seed = " << seed << '\n'
       << "jitter_fraction = " << fmt(jitter_fraction) << '\n'
       << "translate_mode = " << (translate_mode == TranslateMode::joint ? "joint" : "per_patch") << '\n';
    return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace xpatch

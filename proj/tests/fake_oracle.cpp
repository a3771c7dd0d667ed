// Stdio oracle used by the protocol tests. Flags:
//   --modality M --concurrency N --protocol V
//   --reverse       answer requests in pairs, second one first
//   --error-every K every K-th request gets an error response
//   --bad-score     scores out of range
//   --silent        never answer
//   --exit-after N  exit after N answers
//   --no-hello      exit before the handshake
//   --garbage       answer with a line that is not JSON

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "support/fake_detector.hpp"

int main(int argc, char** argv) {
    using namespace xpatch;
    testing::FakeDetector det;
    int concurrency = 1, version = 1, error_every = 0, exit_after = -1;
    bool reverse = false, silent = false, no_hello = false, garbage = false;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&] { return std::string(i + 1 < argc ? argv[++i] : ""); };
        if (a == "--modality") det.modality = parse_modality(next());
        else if (a == "--concurrency") concurrency = std::stoi(next());
        else if (a == "--protocol") version = std::stoi(next());
        else if (a == "--reverse") reverse = true;
        else if (a == "--error-every") error_every = std::stoi(next());
        else if (a == "--bad-score") det.bad_score = true;
        else if (a == "--silent") silent = true;
        else if (a == "--exit-after") exit_after = std::stoi(next());
        else if (a == "--no-hello") no_hello = true;
        else if (a == "--garbage") garbage = true;
    }
    if (no_hello) return 0;
    nlohmann::json hello = {{"hello", {{"protocol", version}, {"modality", to_string(det.modality)}, {"max_concurrency", concurrency}}}};
    std::cout << hello.dump() << std::endl;

    int answered = 0, seen = 0;
    std::vector<std::string> held;
    auto emit = [&](const std::string& req) {
        ++seen;
        if (garbage) {
            std::cout << "not json" << std::endl;
        } else if (error_every > 0 && seen % error_every == 0) {
            oracle::protocol::Response r;
            r.id = nlohmann::json::parse(req).at("id").get<std::string>();
            r.error = "simulated failure";
            std::cout << oracle::protocol::encode_response(r) << std::endl;
        } else {
            std::cout << det.answer(req) << std::endl;
        }
        if (++answered == exit_after) std::exit(0);
    };
    for (std::string line; std::getline(std::cin, line);) {
        if (line.empty() || silent) continue;
        if (!reverse) {
            emit(line);
            continue;
        }
        held.push_back(line);
        if (held.size() == 2) {
            emit(held[1]);
            emit(held[0]);
            held.clear();
        }
    }
    return 0;
}

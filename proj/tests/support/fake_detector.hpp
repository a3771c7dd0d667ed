#pragma once

// Toy detector speaking the oracle wire protocol. Used by the stdio fake
// oracle binary and by the in-process HTTP server in the tests.

#include <string>

#include <json.hpp>

#include "xpatch/external_oracle.hpp"
#include "xpatch/png_io.hpp"

namespace xpatch::testing {

struct FakeDetector {
    Modality modality = Modality::visible;
    bool bad_score = false;

    // One box over the whole frame; score drops with the share of cover-valued pixels.
    std::string answer(const std::string& request_line) const {
        using nlohmann::json;
        oracle::protocol::Response r;
        try {
            json j = json::parse(request_line);
            r.id = j.at("id").get<std::string>();
            if (j.at("modality").get<std::string>() != to_string(modality)) {
                r.error = "wrong modality";
                return oracle::protocol::encode_response(r);
            }
            Image img = io::decode_png(io::base64_decode(j.at("image_png_b64").get<std::string>()));
            const std::uint8_t cover = modality == Modality::visible ? 255 : 32;
            std::size_t hit = 0;
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x) hit += img.at(y, x, 0) == cover;
            double score = 0.9 * (1.0 - static_cast<double>(hit) / (img.height() * img.width()));
            r.detections.push_back(
                {{0, 0, static_cast<double>(img.width()), static_cast<double>(img.height())}, score});
        } catch (const std::exception& e) {
            r.error = e.what();
            if (r.id.empty()) r.id = "?";
        }
        // encode_response would happily write this; the client must reject it
        if (bad_score && r.error.empty()) r.detections[0].score = 1.3;
        return oracle::protocol::encode_response(r);
    }
};

}  // namespace xpatch::testing

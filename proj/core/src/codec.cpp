#include "ultrabrown/codec.hpp"

namespace ultrabrown::padic {

namespace {
constexpr char kAlphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz";

std::uint32_t decode_char(char c) {
    if (c >= '0' && c <= '9') return static_cast<std::uint32_t>(c - '0');
    if (c >= 'a' && c <= 'z') return static_cast<std::uint32_t>(c - 'a' + 10);
    throw PadicError(std::string("bad digit character '") + c + "'");
}
}  // namespace

void to_json(nlohmann::json& j, const PadicScalar& x) {
    j = nlohmann::json::object();
    j["p"] = x.prime();
    j["v"] = x.is_zero() ? nlohmann::json(nullptr) : nlohmann::json(x.valuation());
    if (x.prime() <= 36) {
        std::string digits;
        for (auto d : x.digits()) digits.push_back(kAlphabet[d]);
        j["digits"] = digits;
    } else {
        j["digits"] = x.digits();
    }
    j["prec"] = x.abs_prec();
}

void from_json(const nlohmann::json& j, PadicScalar& x) {
    if (j.is_string()) {
        x = PadicScalar::parse(j.get<std::string>());
        return;
    }
    const auto p = j.at("p").get<std::uint32_t>();
    const auto prec = j.at("prec").get<std::int64_t>();
    if (j.at("v").is_null()) {
        x = PadicScalar::zero(p, prec);
        return;
    }
    std::vector<std::uint32_t> digits;
    const auto& d = j.at("digits");
    if (d.is_string()) {
        for (char c : d.get<std::string>()) digits.push_back(decode_char(c));
    } else {
        digits = d.get<std::vector<std::uint32_t>>();
    }
    x = PadicScalar::from_digits(p, j.at("v").get<std::int64_t>(), std::move(digits), prec);
}

void to_json(nlohmann::json& j, const PadicVector& x) {
    j = nlohmann::json::array();
    for (const auto& c : x.coords()) j.push_back(c);
}

void from_json(const nlohmann::json& j, PadicVector& x) {
    std::vector<PadicScalar> coords;
    for (const auto& c : j) coords.push_back(c.get<PadicScalar>());
    x = PadicVector(std::move(coords));
}

void to_json(nlohmann::json& j, const BallAddress& a) {
    j = nlohmann::json{{"p", a.prime()}, {"N", a.dim()}, {"level", a.level()}, {"path", a.to_string()}};
}

}  // namespace ultrabrown::padic

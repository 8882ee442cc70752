#include "avol/rational.hpp"

#include "avol/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace avol {

std::string decimal_string(const Rational& r, int digits) {
    const bool neg = r < 0;
    Rational a = neg ? Rational(-r) : r;
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    // round half away from zero
    BigInt scaled = (numerator(a) * scale * 2 + denominator(a)) / (denominator(a) * 2);
    BigInt ip = scaled / scale;
    BigInt fp = scaled % scale;
    std::string frac = fp.str();
    frac.insert(frac.begin(), static_cast<std::size_t>(digits) - frac.size(), '0');
    // trim trailing zeros but keep at least one digit
    while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
    std::string out = (neg && scaled != 0 ? "-" : "") + ip.str();
    if (!(frac.size() == 1 && frac[0] == '0')) out += "." + frac;
    return out;
}

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw domain_error("empty rational literal");
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt num(text.substr(0, slash));
            BigInt den(text.substr(slash + 1));
            if (den == 0) throw domain_error("zero denominator: " + text);
            return Rational(num, den);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(BigInt(text));
        std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (ip == "-" || ip.empty()) ip = neg ? "-0" : "0";
        BigInt scale = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
        BigInt whole(ip);
        BigInt frac = fp.empty() ? BigInt(0) : BigInt(fp);
        BigInt num = whole * scale + (neg ? -frac : frac);
        return Rational(num, scale);
    } catch (const std::exception& e) {
        throw domain_error("bad rational literal '" + text + "': " + e.what());
    }
}

}  // namespace avol

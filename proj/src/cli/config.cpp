#include "dgpenalty/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dgpenalty/error.hpp"
#include "dgpenalty/sweeps.hpp"

namespace dgp::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

} // namespace

double parse_real(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, what + ": '" + text + "' is not a number");
}

long long parse_integer(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, what + ": '" + text + "' is not an integer");
}

Config::Config(std::vector<ConfigKey> keys) : keys_(std::move(keys))
{
    for (const auto& k : keys_) {
        values_[k.name] = k.default_value;
    }
}

bool Config::known(const std::string& key) const
{
    return values_.count(key) != 0;
}

void Config::set(const std::string& key, const std::string& value)
{
    if (!known(key)) {
        throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    }
    values_[key] = value;
}

void Config::load(std::istream& is, const std::string& source)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidArgument,
                        source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!known(key)) {
            throw Error(ErrorKind::InvalidArgument,
                        source + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
        }
        values_[key] = trim(line.substr(eq + 1));
    }
}

void Config::load_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
    }
    load(in, path);
}

const std::string& Config::str(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    }
    return it->second;
}

double Config::real(const std::string& key) const
{
    return parse_real(str(key), key);
}

int Config::integer(const std::string& key) const
{
    return static_cast<int>(parse_integer(str(key), key));
}

unsigned long long Config::uint64(const std::string& key) const
{
    const long long v = parse_integer(str(key), key);
    if (v < 0) {
        throw Error(ErrorKind::InvalidArgument, key + " must be nonnegative");
    }
    return static_cast<unsigned long long>(v);
}

bool Config::boolean(const std::string& key) const
{
    const std::string& v = str(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "0" || v == "false" || v == "no" || v == "off") {
        return false;
    }
    throw Error(ErrorKind::InvalidArgument, key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> Config::list(const std::string& key) const
{
    const std::string& v = str(key);
    if (trim(v).empty()) {
        return {};
    }
    return split(v, ',');
}

std::vector<double> Config::reals(const std::string& key) const
{
    const std::string& v = str(key);
    if (trim(v).empty()) {
        return {};
    }
    try {
        return parse_grid(v);
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidArgument, key + ": " + e.what());
    }
}

std::vector<int> Config::integers(const std::string& key) const
{
    std::vector<int> out;
    for (const auto& item : list(key)) {
        out.push_back(static_cast<int>(parse_integer(item, key)));
    }
    return out;
}

void Config::write(std::ostream& os) const
{
    for (const auto& k : keys_) {
        os << k.name << " = " << values_.at(k.name) << '\n';
    }
}

std::vector<double> parse_grid(const std::string& spec)
{
    const std::string s = trim(spec);
    if (s.rfind("log:", 0) == 0) {
        const auto parts = split(s.substr(4), ':');
        if (parts.size() != 3) {
            throw Error(ErrorKind::InvalidArgument, "log grid is 'log:lo:hi:n'");
        }
        return log_grid(parse_real(parts[0], "log grid"), parse_real(parts[1], "log grid"),
                        static_cast<int>(parse_integer(parts[2], "log grid")));
    }
    if (s.rfind("halving:", 0) == 0) {
        const auto parts = split(s.substr(8), ':');
        if (parts.size() != 2) {
            throw Error(ErrorKind::InvalidArgument, "halving grid is 'halving:h0:n'");
        }
        const long long n = parse_integer(parts[1], "halving grid");
        if (n < 1) {
            throw Error(ErrorKind::InvalidArgument, "halving grid needs n >= 1");
        }
        return halving_grid(parse_real(parts[0], "halving grid"), static_cast<int>(n));
    }
    std::vector<double> out;
    for (const auto& item : split(s, ',')) {
        out.push_back(parse_real(item, "grid"));
    }
    return out;
}

} // namespace dgp::cli

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dgp::cli {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Flat key = value settings. Values come from the declared defaults, then a
/// config file, then command-line flags; unknown keys are rejected.
class Config {
public:
    explicit Config(std::vector<ConfigKey> keys);

    [[nodiscard]] const std::vector<ConfigKey>& keys() const noexcept { return keys_; }
    [[nodiscard]] bool known(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    /// Lines `key = value`; `#` starts a comment. Throws on unknown keys.
    void load(std::istream& is, const std::string& source = "config");
    void load_file(const std::string& path);

    [[nodiscard]] const std::string& str(const std::string& key) const;
    [[nodiscard]] double real(const std::string& key) const;
    [[nodiscard]] int integer(const std::string& key) const;
    [[nodiscard]] unsigned long long uint64(const std::string& key) const;
    [[nodiscard]] bool boolean(const std::string& key) const;
    [[nodiscard]] std::vector<std::string> list(const std::string& key) const;
    [[nodiscard]] std::vector<double> reals(const std::string& key) const;
    [[nodiscard]] std::vector<int> integers(const std::string& key) const;

    /// Every key in declaration order, one `key = value` per line.
    void write(std::ostream& os) const;

private:
    std::vector<ConfigKey> keys_;
    std::map<std::string, std::string> values_;
};

/// Grid spec: comma list `a,b,c`, `log:lo:hi:n`, or `halving:h0:n`.
std::vector<double> parse_grid(const std::string& spec);

double parse_real(const std::string& text, const std::string& what);
long long parse_integer(const std::string& text, const std::string& what);

} // namespace dgp::cli

#include "retirement/lifecycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace retirement {

double MortalityTable::survival_prob(int age) const {
    if (age < first_age || age >= last_age())
        throw std::domain_error("mortality table: age " + std::to_string(age) + " out of range");
    return survival[static_cast<std::size_t>(age - first_age)];
}

double MortalityTable::life_expectancy(int age) const {
    if (age < first_age || age >= last_age())
        throw std::domain_error("mortality table: age " + std::to_string(age) + " out of range");
    double alive = 1.0;
    double expect = 0.5;
    for (int a = age; a < last_age(); ++a) {
        alive *= survival_prob(a);
        expect += alive;
    }
    return expect;
}

void MortalityTable::validate() const {
    if (survival.empty())
        throw std::invalid_argument("mortality table: empty");
    for (std::size_t i = 0; i < survival.size(); ++i) {
        if (!(survival[i] > 0.0 && survival[i] <= 1.0))
            throw std::invalid_argument("mortality table: survival probability out of (0,1] at age " +
                                        std::to_string(first_age + static_cast<int>(i)));
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field.erase(0, field.find_first_not_of(" \t\r"));
        field.erase(field.find_last_not_of(" \t\r") + 1);
        out.push_back(field);
    }
    return out;
}

} // namespace

MortalityTable MortalityTable::parse_csv(const std::string& text, const std::string& source_name) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument(source_name + ": empty life table");

    auto header = split_csv_line(line);
    bool sexed;
    if (header.size() == 3 && header[0] == "age" && header[1] == "male_survival" &&
        header[2] == "female_survival") {
        sexed = true;
    } else if (header.size() == 2 && header[0] == "age" && header[1] == "unisex_survival") {
        sexed = false;
    } else {
        throw std::invalid_argument(source_name + ": unrecognized life table header '" + line + "'");
    }

    MortalityTable table;
    table.survival.clear();
    int row = 1;
    bool first = true;
    int prev_age = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r")
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument(source_name + ": row " + std::to_string(row) +
                                        ": wrong field count");
        int age = std::stoi(fields[0]);
        if (first) {
            table.first_age = age;
            first = false;
        } else if (age != prev_age + 1) {
            throw std::invalid_argument(source_name + ": row " + std::to_string(row) +
                                        ": ages must be consecutive");
        }
        prev_age = age;
        double s = sexed ? 0.5 * (std::stod(fields[1]) + std::stod(fields[2]))
                         : std::stod(fields[1]);
        if (!(s > 0.0 && s <= 1.0))
            throw std::invalid_argument(source_name + ": row " + std::to_string(row) +
                                        ": survival probability out of (0,1]");
        table.survival.push_back(s);
    }
    table.validate();
    return table;
}

MortalityTable MortalityTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open life table: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

void MarketParams::validate() const {
    if (!(risky_vol > 0.0))
        throw std::invalid_argument("market params: risky_vol must be positive");
    if (!(inflation >= 0.0))
        throw std::invalid_argument("market params: negative inflation");
}

double WithdrawalSchedule::min_rate(int age) const {
    if (bands.empty())
        throw std::invalid_argument("withdrawal schedule: empty");
    double rate = bands.front().rate;
    for (const Band& b : bands) {
        if (age >= b.from_age)
            rate = b.rate;
        else
            break;
    }
    return rate;
}

void WithdrawalSchedule::validate() const {
    if (bands.empty())
        throw std::invalid_argument("withdrawal schedule: empty");
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (!(bands[i].rate > 0.0 && bands[i].rate < 1.0))
            throw std::invalid_argument("withdrawal schedule: rate out of (0,1)");
        if (i > 0 && !(bands[i].from_age > bands[i - 1].from_age &&
                       bands[i].rate >= bands[i - 1].rate))
            throw std::invalid_argument("withdrawal schedule: bands must be ascending");
    }
}

WithdrawalSchedule WithdrawalSchedule::regulatory_2016() {
    return WithdrawalSchedule{{{0, 0.04},
                               {65, 0.05},
                               {75, 0.06},
                               {80, 0.07},
                               {85, 0.09},
                               {90, 0.11},
                               {95, 0.14}}};
}

void QuadratureRule::validate() const {
    if (nodes.empty() || nodes.size() != weights.size())
        throw std::invalid_argument("quadrature rule: node/weight size mismatch");
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("quadrature rule: weights do not sum to 1");
    for (double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("quadrature rule: non-positive weight");
}

QuadratureRule QuadratureRule::gauss_hermite(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_hermite: need at least one node");

    // Roots of the physicists' Hermite polynomial by Newton iteration on the
    // orthonormal recurrence.
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    double z = 0.0, pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];

        for (int iter = 0; iter < 100; ++iter) {
            double p1 = std::pow(M_PI, -0.25);
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[static_cast<std::size_t>(i)] = z;
        x[static_cast<std::size_t>(n - 1 - i)] = -z;
        w[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
        w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
    }

    // Standardize to the N(0,1) measure and order nodes ascending.
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = -std::sqrt(2.0) * x[static_cast<std::size_t>(i)];
        rule.weights[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] * inv_sqrt_pi;
    }
    double sum = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& wt : rule.weights)
        wt /= sum;
    rule.validate();
    return rule;
}

std::vector<FamilyTransition> family_transition_probs(FamilyState g, int age,
                                                      const MortalityTable& table) {
    switch (g) {
        case FamilyState::gone:
        case FamilyState::died_this_year:
            return {{FamilyState::gone, 1.0}};
        case FamilyState::single: {
            double q = table.survival_prob(age);
            return {{FamilyState::single, q}, {FamilyState::died_this_year, 1.0 - q}};
        }
        case FamilyState::couple: {
            double q = table.survival_prob(age);
            return {{FamilyState::couple, q}, {FamilyState::single, 1.0 - q}};
        }
    }
    return {};
}

double household_life_expectancy(const MortalityTable& table, int age) {
    if (age < table.first_age || age >= table.last_age())
        throw std::domain_error("mortality table: age " + std::to_string(age) + " out of range");
    double couple = 1.0;  // both members alive
    double single = 0.0;  // exactly one survivor
    double expect = 0.5;
    for (int a = age; a < table.last_age(); ++a) {
        const double q = table.survival_prob(a);
        const double next_single = couple * (1.0 - q) + single * q;
        couple *= q;
        single = next_single;
        expect += couple + single;
    }
    return expect;
}

double discount_factor(int t, int t_prime, double rate) {
    if (t > t_prime)
        throw std::domain_error("discount_factor: reversed horizon");
    return std::exp(-rate * static_cast<double>(t_prime - t));
}

} // namespace retirement

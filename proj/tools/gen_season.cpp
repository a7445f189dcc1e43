// Writes a synthetic season in the football-data.co.uk column layout.
//
// Teams get a latent rating; goals are Poisson with home advantage, which
// fixes the true 1X2 probabilities and the sampled result. Each bookmaker
// quotes odds from a noisy view of the true probabilities plus its own
// margin, rounded to two decimals. A small share of odds cells is left
// blank the way real files have gaps.

#include <CLI11.hpp>

#include <array>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace std::chrono;

const std::map<std::string, std::vector<std::string>> team_names = {
    {"E0", {"Arsenal", "Aston Villa", "Bournemouth", "Chelsea", "Crystal Palace", "Everton", "Leicester",
            "Liverpool", "Man City", "Man United", "Newcastle", "Norwich", "Southampton", "Stoke", "Sunderland",
            "Swansea", "Tottenham", "Watford", "West Brom", "West Ham"}},
    {"SP1", {"Ath Bilbao", "Ath Madrid", "Barcelona", "Betis", "Celta", "Eibar", "Espanol", "Getafe", "Granada",
             "La Coruna", "Las Palmas", "Levante", "Malaga", "Real Madrid", "Sevilla", "Sociedad", "Sp Gijon",
             "Valencia", "Vallecano", "Villarreal"}},
    {"I1", {"Atalanta", "Bologna", "Carpi", "Chievo", "Empoli", "Fiorentina", "Frosinone", "Genoa", "Inter",
            "Juventus", "Lazio", "Milan", "Napoli", "Palermo", "Roma", "Sampdoria", "Sassuolo", "Torino", "Udinese",
            "Verona"}},
    {"D1", {"Augsburg", "Bayern Munich", "Darmstadt", "Dortmund", "Ein Frankfurt", "FC Koln", "Hamburg", "Hannover",
            "Hertha", "Hoffenheim", "Ingolstadt", "Leverkusen", "M'gladbach", "Mainz", "Schalke 04", "Stuttgart",
            "Werder Bremen", "Wolfsburg"}},
};

const std::map<std::string, year_month_day> season_start = {
    {"E0", 2015y / August / 8}, {"SP1", 2015y / August / 22}, {"I1", 2015y / August / 22}, {"D1", 2015y / August / 14}};

struct Book {
    const char* code;
    double margin;
    double blank_rate;
};

constexpr std::array<Book, 5> books = {{{"B365", 0.050, 0.000},
                                        {"BW", 0.060, 0.003},
                                        {"GB", 0.065, 0.010},
                                        {"IW", 0.080, 0.003},
                                        {"LB", 0.070, 0.005}}};

// Circle method; returns rounds of (home, away) index pairs for a double
// round robin with alternating home advantage.
std::vector<std::vector<std::pair<int, int>>> double_round_robin(int n) {
    std::vector<int> ring(n);
    for (int i = 0; i < n; ++i) ring[i] = i;
    std::vector<std::vector<std::pair<int, int>>> rounds;
    for (int r = 0; r < n - 1; ++r) {
        std::vector<std::pair<int, int>> games;
        for (int i = 0; i < n / 2; ++i) {
            int a = ring[i], b = ring[n - 1 - i];
            if ((r + i) % 2 == 1) std::swap(a, b);
            games.emplace_back(a, b);
        }
        rounds.push_back(games);
        std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
    }
    const auto first_half = rounds;
    for (const auto& games : first_half) {
        std::vector<std::pair<int, int>> mirrored;
        for (auto [h, a] : games) mirrored.emplace_back(a, h);
        rounds.push_back(mirrored);
    }
    return rounds;
}

double poisson_pmf(int k, double lambda) {
    return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

std::array<double, 3> outcome_probs(double lh, double la) {
    std::array<double, 3> p{0, 0, 0};
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j <= 12; ++j) {
            const double q = poisson_pmf(i, lh) * poisson_pmf(j, la);
            p[i > j ? 0 : i == j ? 1 : 2] += q;
        }
    const double s = p[0] + p[1] + p[2];
    for (auto& x : p) x /= s;
    return p;
}

std::string fmt_date(year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%02d", static_cast<unsigned>(d.day()), static_cast<unsigned>(d.month()),
                  static_cast<int>(d.year()) % 100);
    return buf;
}

std::string fmt_odds(double o) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", o);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic football-data style season generator"};
    std::string league = "E0";
    int teams = 0;
    std::uint64_t seed = 2015;
    std::string out_path;
    double noise = 0.06;
    app.add_option("--league", league, "Div code (E0, SP1, I1, D1)")->required();
    app.add_option("--teams", teams, "number of teams (even); default: the league's size");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--noise", noise, "log-sd of each bookmaker's probability error");
    app.add_option("--out", out_path, "output file (default stdout)");
    CLI11_PARSE(app, argc, argv);

    auto names_it = team_names.find(league);
    if (names_it == team_names.end()) {
        std::cerr << "unknown league " << league << "\n";
        return 2;
    }
    const auto& names = names_it->second;
    if (teams == 0) teams = static_cast<int>(names.size());
    if (teams < 2 || teams % 2 != 0 || teams > static_cast<int>(names.size())) {
        std::cerr << "--teams must be even and at most " << names.size() << "\n";
        return 2;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> rating_dist(0.0, 0.35);
    std::vector<double> rating(teams);
    for (auto& r : rating) r = rating_dist(rng);

    std::ofstream file;
    std::ostream& out = out_path.empty() ? std::cout : (file.open(out_path), file);
    out << "Div,Date,HomeTeam,AwayTeam,FTHG,FTAG,FTR";
    for (const auto& b : books) out << ',' << b.code << "H," << b.code << "D," << b.code << 'A';
    out << '\n';

    const auto rounds = double_round_robin(teams);
    sys_days round_day{season_start.at(league)};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> err(0.0, noise);

    for (std::size_t r = 0; r < rounds.size(); ++r) {
        for (std::size_t g = 0; g < rounds[r].size(); ++g) {
            const auto [h, a] = rounds[r][g];
            // Most games on the round's Saturday, a few on Sunday or Monday.
            const int shift = g + 2 >= rounds[r].size() ? 1 : (g == 0 && r % 3 == 0 ? 2 : 0);
            const year_month_day date{round_day + days{shift}};

            const double diff = rating[h] - rating[a];
            const double lh = std::exp(0.30 + diff / 1.4);
            const double la = std::exp(0.05 - diff / 1.4);
            const auto truth = outcome_probs(lh, la);

            std::poisson_distribution<int> gh(lh), ga(la);
            const int hg = gh(rng), ag = ga(rng);
            const char ftr = hg > ag ? 'H' : hg == ag ? 'D' : 'A';

            out << league << ',' << fmt_date(date) << ',' << names[h] << ',' << names[a] << ',' << hg << ',' << ag
                << ',' << ftr;
            for (const auto& b : books) {
                std::array<double, 3> view;
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += view[k] = truth[k] * std::exp(err(rng));
                const bool blank = unit(rng) < b.blank_rate;
                for (int k = 0; k < 3; ++k) {
                    const double odds = std::max(1.01, 1.0 / (view[k] / s * (1.0 + b.margin)));
                    out << ',' << (blank ? std::string{} : fmt_odds(odds));
                }
            }
            out << '\n';
        }
        // Weekly rounds; a midweek round every sixth week and a winter break.
        round_day += days{r % 6 == 5 ? 4 : 7};
        if (r == rounds.size() / 2 - 1) round_day += days{league == "D1" ? 35 : 7};
    }
    return 0;
}

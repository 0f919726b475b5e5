// cbfp: experiment runner for complex block floating-point encodings.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbfp/cbfp.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 0xCBF0;

struct CommonFlags {
    std::string format = "single";
    std::uint64_t seed = kDefaultSeed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--format", f.format, "half, single or double")
        ->check(CLI::IsMember({"half", "single", "double"}));
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--out", f.out, "output CSV path (stdout if omitted)");
}

// Writes to a sibling temporary file and renames, so a failed run never leaves partial output.
void emit(const CommonFlags& f, const std::string& text) {
    if (f.out.empty()) {
        std::cout << text;
        return;
    }
    const std::string tmp = f.out + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw cbfp::Error(cbfp::errc::invalid_argument, "cannot write " + tmp);
        os << text;
        if (!os.flush()) throw cbfp::Error(cbfp::errc::invalid_argument, "write failed for " + tmp);
    }
    std::filesystem::rename(tmp, f.out);
}

std::string metadata(const std::string& cmd, const CommonFlags& f, const std::string& extra = {}) {
    std::ostringstream os;
    os << "# cbfp " << cmd << " format=" << f.format << " seed=0x" << std::hex << f.seed << std::dec;
    if (!extra.empty()) os << ' ' << extra;
    os << '\n';
    return os.str();
}

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::string& text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto x = item.find('x');
        const std::size_t n1 = cbfp::detail::parse_u64(item.substr(0, x));
        const std::size_t n2 = x == std::string::npos ? n1 : cbfp::detail::parse_u64(item.substr(x + 1));
        if (n1 == 0 || n2 == 0) throw cbfp::Error(cbfp::errc::invalid_argument, "sizes must be >= 1");
        out.emplace_back(n1, n2);
    }
    if (out.empty()) throw cbfp::Error(cbfp::errc::invalid_argument, "no sizes given");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Complex block floating-point experiments"};
    app.require_subcommand(1);

    CommonFlags alu_f, qam_f, cx_f, rrc_f, wl_f, rate_f;

    auto* alu = app.add_subcommand("alu-evm", "EVM of block add/mul/conv over an inputs-ratio sweep");
    add_common(alu, alu_f);
    std::string alu_op = "mul", alu_ratio = "0:200:5";
    std::size_t alu_n = 64;
    alu->add_option("--op", alu_op)->check(CLI::IsMember({"add", "mul", "conv"}));
    alu->add_option("--ratio", alu_ratio, "start:stop:step in dB");
    alu->add_option("--block-size", alu_n)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));

    auto* qam = app.add_subcommand("qam", "QAM chain EVM per encoding over an SNR sweep");
    add_common(qam, qam_f);
    std::string qam_cfg, qam_snr = "10:40:5";
    qam->add_option("--config", qam_cfg, "key=value configuration file");
    qam->add_option("--snr", qam_snr, "start:stop:step in dB");

    auto* cx = app.add_subcommand("complexity", "predicted vs measured pre/post-processing counts");
    add_common(cx, cx_f);
    std::string cx_op = "mul", cx_mode = "box", cx_sizes = "1,4,16,64";
    std::size_t cx_trials = 100;
    cx->add_option("--op", cx_op)->check(CLI::IsMember({"add", "mul", "conv"}));
    cx->add_option("--mode", cx_mode)->check(CLI::IsMember({"ieee754", "common", "box"}));
    cx->add_option("--sizes", cx_sizes, "comma list of N or N1xN2");
    cx->add_option("--trials", cx_trials);

    auto* rrc = app.add_subcommand("rrc-range", "dynamic range of RRC taps vs roll-off");
    add_common(rrc, rrc_f);
    std::string rrc_alpha = "0.05:0.5:0.05";
    unsigned rrc_order = 32, rrc_l = 4;
    rrc->add_option("--alpha", rrc_alpha);
    rrc->add_option("--order", rrc_order);
    rrc->add_option("--upsample", rrc_l);

    auto* wl = app.add_subcommand("wordlength", "bits per block under each encoding");
    add_common(wl, wl_f);
    std::size_t wl_n = 25;
    wl->add_option("--nv", wl_n)->check(CLI::PositiveNumber);

    auto* rates = app.add_subcommand("rates", "memory and MAC rates of the QAM chain");
    add_common(rates, rate_f);
    std::string rate_cfg, rate_mode = "box";
    rates->add_option("--config", rate_cfg);
    rates->add_option("--mode", rate_mode)->check(CLI::IsMember({"ieee754", "common", "box"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*alu) {
            const auto fmt = cbfp::format_from_name(alu_f.format);
            const auto rows = cbfp::alu_evm_sweep(cbfp::op_from_name(alu_op), fmt, cbfp::parse_sweep(alu_ratio),
                                                  alu_n, alu_f.seed);
            emit(alu_f, metadata("alu-evm", alu_f, "block_size=" + std::to_string(alu_n)) + cbfp::alu_evm_csv(rows));
        } else if (*qam) {
            auto cfg = qam_cfg.empty() ? cbfp::TransceiverConfig{} : cbfp::load_config(qam_cfg);
            if (qam->count("--format")) cfg.format = cbfp::format_from_name(qam_f.format);
            if (qam->count("--seed")) cfg.seed = qam_f.seed;
            qam_f.format = std::string(cbfp::format_name(cfg.format));
            qam_f.seed = cfg.seed;
            const auto rows = cbfp::qam_sweep(cfg, cbfp::parse_sweep(qam_snr));
            emit(qam_f, metadata("qam", qam_f, "modes_share_seed=1 noise_seed=0x" + [&] {
                              std::ostringstream os;
                              os << std::hex << cbfp::noise_seed(cfg);
                              return os.str();
                          }()) + cbfp::qam_csv(rows));
        } else if (*cx) {
            const auto fmt = cbfp::format_from_name(cx_f.format);
            const auto op = cbfp::op_from_name(cx_op);
            const auto mode = cbfp::encoding_from_name(cx_mode);
            std::vector<cbfp::ComplexityRow> rows;
            std::uint64_t index = 0;
            for (auto [n1, n2] : parse_sizes(cx_sizes))
                rows.push_back(cbfp::complexity_point(op, mode, n1, n2, fmt, cx_trials,
                                                      cbfp::point_seed(cx_f.seed, index++)));
            emit(cx_f, metadata("complexity", cx_f, "trials=" + std::to_string(cx_trials)) +
                           cbfp::complexity_csv(rows));
        } else if (*rrc) {
            const auto fmt = cbfp::format_from_name(rrc_f.format);
            emit(rrc_f, metadata("rrc-range", rrc_f) +
                            cbfp::rrc_range_csv(cbfp::parse_sweep(rrc_alpha), rrc_order, rrc_l, fmt));
        } else if (*wl) {
            emit(wl_f, metadata("wordlength", wl_f) + cbfp::wordlength_csv(wl_n, cbfp::format_from_name(wl_f.format)));
        } else if (*rates) {
            auto cfg = rate_cfg.empty() ? cbfp::TransceiverConfig{} : cbfp::load_config(rate_cfg);
            if (rates->count("--format")) cfg.format = cbfp::format_from_name(rate_f.format);
            rate_f.format = std::string(cbfp::format_name(cfg.format));
            emit(rate_f, metadata("rates", rate_f, "mode=" + rate_mode) +
                             cbfp::rates_csv(cbfp::rate_model(cfg, cbfp::encoding_from_name(rate_mode))));
        }
    } catch (const std::exception& e) {
        std::cerr << "cbfp: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

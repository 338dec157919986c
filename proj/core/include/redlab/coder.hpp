#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "redlab/codecs.hpp"
#include "redlab/family.hpp"

namespace redlab {

/// Byte-aligned bit buffer, MSB-first within each byte.
struct Bitstream {
    std::vector<std::uint8_t> bytes;
    std::size_t bit_count = 0;

    void push(bool bit);
    bool bit(std::size_t i) const;
};

/// Sequential next-symbol distribution, the interface the arithmetic coder
/// consumes. Encoder and decoder must drive identical instances.
class SequentialModel {
public:
    virtual ~SequentialModel() = default;
    virtual int alphabet_size() const = 0;
    /// Distribution of the next symbol given everything seen so far.
    virtual void distribution(std::span<double> out) const = 0;
    virtual void update(Symbol s) = 0;
};

std::unique_ptr<SequentialModel> make_ideal_predictor(const ParamVector& theta);
std::unique_ptr<SequentialModel> make_mixture_predictor(const ParamFamily& family);

inline constexpr int kFrequencyBits = 32;

/// Quantizes a distribution to integer frequencies summing to 2^32, with at
/// least one count for every symbol of positive probability. Returns the
/// cumulative table (k + 1 entries).
std::vector<std::uint64_t> quantize_distribution(std::span<const double> probs);

/// Arithmetic codes x with the model's sequential probabilities.
/// Supports IdealTheta, JeffreysMixture, and TwoStage (m raw index bits,
/// then the chosen grid point's ideal code). CondTwoStage lengths are not
/// sequential and are rejected. Zero-probability symbols throw ConfigError.
Bitstream encode(const SequenceSample& x, const LengthModel& model);

/// Inverse of encode. Throws DecodeError on truncated or malformed input.
SequenceSample decode(const Bitstream& bits, const LengthModel& model, std::int64_t n);

/// Container layout:
///   "URLB" | version (u8) | varint json_len | json | varint n | varint bit_count | payload
/// Varints are unsigned LEB128. The JSON header carries the family
/// ({"kind","k","probs"}) plus "model" and, for two-stage, "m".
inline constexpr std::uint8_t kContainerVersion = 1;

struct Container {
    nlohmann::json header;
    std::int64_t n = 0;
    Bitstream payload;
};

std::vector<std::uint8_t> write_container(const Container& c);
Container read_container(std::span<const std::uint8_t> bytes);

/// Header JSON describing a sequential model, and its inverse.
nlohmann::json model_descriptor(const LengthModel& model);
LengthModel model_from_descriptor(const nlohmann::json& header, std::int64_t n);

}  // namespace redlab

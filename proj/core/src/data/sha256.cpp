#include "roomrec/data/sha256.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "roomrec/error.hpp"

namespace roomrec::data {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
        throw Error("sha256 digest failed");
    std::string hex(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) std::snprintf(&hex[2 * i], 3, "%02x", digest[i]);
    return hex;
}

std::string sha256_hex(const std::string &text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

}  // namespace roomrec::data

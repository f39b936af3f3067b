#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 aware text normalization shared by the similarity metrics, the
// n-gram membership store and the embedder.
//
// Classification tables are fixed here and define the normative behavior:
//  - whitespace is the Unicode White_Space set;
//  - punctuation is the Unicode punctuation category (P*) restricted to the
//    Latin, General Punctuation, CJK and fullwidth blocks listed below.
// Case folding covers ASCII and Latin-1.

namespace takedown {

// Decodes one UTF-8 code point starting at s[i]; advances i. Invalid bytes
// decode as U+FFFD and consume one byte.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
    };
    if (c < 0x80) {
        ++i;
        return c;
    }
    if ((c & 0xe0) == 0xc0 && cont(1)) {
        char32_t cp = (c & 0x1fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu);
        i += 2;
        return cp >= 0x80 ? cp : 0xfffd;
    }
    if ((c & 0xf0) == 0xe0 && cont(1) && cont(2)) {
        char32_t cp = (c & 0x0fu) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 6 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3fu);
        i += 3;
        return cp >= 0x800 ? cp : 0xfffd;
    }
    if ((c & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = (c & 0x07u) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 12 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3fu) << 6 |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3fu);
        i += 4;
        return cp >= 0x10000 && cp <= 0x10ffff ? cp : 0xfffd;
    }
    ++i;
    return 0xfffd;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::vector<char32_t> decode_all(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) cps.push_back(decode_utf8(s, i));
    return cps;
}

// Unicode White_Space.
inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
        case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200a);
    }
}

// Unicode punctuation (P*) over the blocks this toolkit supports.
inline bool is_punct_cp(char32_t cp) {
    if (cp < 0x80) {
        switch (cp) {
            case '!': case '"': case '#': case '%': case '&': case '\'':
            case '(': case ')': case '*': case ',': case '-': case '.':
            case '/': case ':': case ';': case '?': case '@': case '[':
            case '\\': case ']': case '_': case '{': case '}':
                return true;
            default:
                return false;
        }
    }
    struct Range { char32_t lo, hi; };
    static constexpr Range ranges[] = {
        {0xa1, 0xa1},   {0xa7, 0xa7},   {0xab, 0xab},   {0xb6, 0xb7},
        {0xbb, 0xbb},   {0xbf, 0xbf},   {0x2010, 0x2027}, {0x2030, 0x205e},
        {0x2e00, 0x2e7f}, {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301f},
        {0x3030, 0x3030}, {0x303d, 0x303d}, {0x30fb, 0x30fb},
        {0xfe10, 0xfe19}, {0xfe30, 0xfe52}, {0xfe54, 0xfe61},
        {0xff01, 0xff03}, {0xff05, 0xff0a}, {0xff0c, 0xff0f}, {0xff1a, 0xff1b},
        {0xff1f, 0xff20}, {0xff3b, 0xff3d}, {0xff3f, 0xff3f}, {0xff5b, 0xff5b},
        {0xff5d, 0xff5d}, {0xff5f, 0xff65},
    };
    for (const auto& r : ranges)
        if (cp >= r.lo && cp <= r.hi) return cp != 0x2028 && cp != 0x2029;
    return false;
}

// ASCII + Latin-1 lowercasing; other scripts pass through.
inline char32_t to_lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
    return cp;
}

// Lowercase and drop whitespace and punctuation; code-point form.
inline std::vector<char32_t> normalize_chars_cp(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        char32_t cp = decode_utf8(s, i);
        if (is_space_cp(cp) || is_punct_cp(cp)) continue;
        out.push_back(to_lower_cp(cp));
    }
    return out;
}

inline std::string normalize_chars(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : normalize_chars_cp(s)) encode_utf8(cp, out);
    return out;
}

// Lowercase, strip punctuation, split on whitespace.
inline std::vector<std::string> normalize_words(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (std::size_t i = 0; i < s.size();) {
        char32_t cp = decode_utf8(s, i);
        if (is_space_cp(cp)) {
            if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
            continue;
        }
        if (is_punct_cp(cp)) continue;
        encode_utf8(to_lower_cp(cp), cur);
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

// Raw whitespace word-splitting, no case or punctuation changes. This is the
// tokenization used for corpus examples and the toy LM.
inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        char32_t cp = decode_utf8(s, i);
        if (is_space_cp(cp)) {
            if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.append(s.substr(start, i - start));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

}  // namespace takedown

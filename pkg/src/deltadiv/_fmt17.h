// 17-significant-digit shortest-form float rendering, same text as printf("%.17g").
#include <charconv>

static inline int fmt17(char* buf, int cap, double x) {
    auto r = std::to_chars(buf, buf + cap, x, std::chars_format::general, 17);
    return static_cast<int>(r.ptr - buf);
}

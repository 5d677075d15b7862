#include "qexp/tokenize.hpp"

namespace qexp {

namespace {

class PorterStemmer {
  public:
    explicit PorterStemmer(std::string_view word) : b(word), k(static_cast<int>(word.size()) - 1) {}

    std::string run()
    {
        if (k <= 1) {
            return b;
        }
        step1ab();
        if (k > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b.substr(0, static_cast<std::size_t>(k + 1));
    }

  private:
    std::string b;
    int k;
    int j = 0;

    char at(int i) const { return b[static_cast<std::size_t>(i)]; }

    bool cons(int i) const
    {
        switch (at(i)) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !cons(i - 1);
        default:
            return true;
        }
    }

    // Number of consonant sequences between 0 and j.
    int m() const
    {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) {
                return n;
            }
            if (!cons(i)) {
                break;
            }
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j) {
                    return n;
                }
                if (cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j) {
                    return n;
                }
                if (!cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const
    {
        for (int i = 0; i <= j; ++i) {
            if (!cons(i)) {
                return true;
            }
        }
        return false;
    }

    bool double_consonant(int i) const
    {
        if (i < 1) {
            return false;
        }
        if (at(i) != at(i - 1)) {
            return false;
        }
        return cons(i);
    }

    // consonant-vowel-consonant ending at i, where the last consonant is not w, x or y
    bool cvc(int i) const
    {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) {
            return false;
        }
        char ch = at(i);
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }

    bool ends(std::string_view s)
    {
        int len = static_cast<int>(s.size());
        if (len > k + 1) {
            return false;
        }
        if (std::string_view(b).substr(static_cast<std::size_t>(k - len + 1), s.size()) != s) {
            return false;
        }
        j = k - len;
        return true;
    }

    void set_to(std::string_view s)
    {
        b.replace(static_cast<std::size_t>(j + 1), static_cast<std::size_t>(k - j), s);
        k = j + static_cast<int>(s.size());
    }

    void replace_if_measure(std::string_view s)
    {
        if (m() > 0) {
            set_to(s);
        }
    }

    void step1ab()
    {
        if (at(k) == 's') {
            if (ends("sses")) {
                k -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (at(k - 1) != 's') {
                --k;
            }
        }
        if (ends("eed")) {
            if (m() > 0) {
                --k;
            }
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k = j;
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (double_consonant(k)) {
                --k;
                char ch = at(k);
                if (ch == 'l' || ch == 's' || ch == 'z') {
                    ++k;
                }
            } else if (m() == 1 && cvc(k)) {
                set_to("e");
            }
        }
    }

    void step1c()
    {
        if (ends("y") && vowel_in_stem()) {
            b[static_cast<std::size_t>(k)] = 'i';
        }
    }

    struct Rule {
        std::string_view suffix;
        std::string_view replacement;
    };

    template <std::size_t N>
    void apply_first(const Rule (&rules)[N])
    {
        for (const auto& r : rules) {
            if (ends(r.suffix)) {
                replace_if_measure(r.replacement);
                return;
            }
        }
    }

    void step2()
    {
        if (k < 1) {
            return;
        }
        switch (at(k - 1)) {
        case 'a': {
            static constexpr Rule rules[] = {{"ational", "ate"}, {"tional", "tion"}};
            apply_first(rules);
            break;
        }
        case 'c': {
            static constexpr Rule rules[] = {{"enci", "ence"}, {"anci", "ance"}};
            apply_first(rules);
            break;
        }
        case 'e': {
            static constexpr Rule rules[] = {{"izer", "ize"}};
            apply_first(rules);
            break;
        }
        case 'l': {
            static constexpr Rule rules[] = {
                {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
            apply_first(rules);
            break;
        }
        case 'o': {
            static constexpr Rule rules[] = {{"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
            apply_first(rules);
            break;
        }
        case 's': {
            static constexpr Rule rules[] = {
                {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
            apply_first(rules);
            break;
        }
        case 't': {
            static constexpr Rule rules[] = {{"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
            apply_first(rules);
            break;
        }
        case 'g': {
            static constexpr Rule rules[] = {{"logi", "log"}};
            apply_first(rules);
            break;
        }
        default:
            break;
        }
    }

    void step3()
    {
        switch (at(k)) {
        case 'e': {
            static constexpr Rule rules[] = {{"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
            apply_first(rules);
            break;
        }
        case 'i': {
            static constexpr Rule rules[] = {{"iciti", "ic"}};
            apply_first(rules);
            break;
        }
        case 'l': {
            static constexpr Rule rules[] = {{"ical", "ic"}, {"ful", ""}};
            apply_first(rules);
            break;
        }
        case 's': {
            static constexpr Rule rules[] = {{"ness", ""}};
            apply_first(rules);
            break;
        }
        default:
            break;
        }
    }

    void step4()
    {
        if (k < 1) {
            return;
        }
        bool matched = false;
        switch (at(k - 1)) {
        case 'a':
            matched = ends("al");
            break;
        case 'c':
            matched = ends("ance") || ends("ence");
            break;
        case 'e':
            matched = ends("er");
            break;
        case 'i':
            matched = ends("ic");
            break;
        case 'l':
            matched = ends("able") || ends("ible");
            break;
        case 'n':
            matched = ends("ant") || ends("ement") || ends("ment") || ends("ent");
            break;
        case 'o':
            if (ends("ion") && j >= 0 && (at(j) == 's' || at(j) == 't')) {
                matched = true;
            } else {
                matched = ends("ou");
            }
            break;
        case 's':
            matched = ends("ism");
            break;
        case 't':
            matched = ends("ate") || ends("iti");
            break;
        case 'u':
            matched = ends("ous");
            break;
        case 'v':
            matched = ends("ive");
            break;
        case 'z':
            matched = ends("ize");
            break;
        default:
            break;
        }
        if (matched && m() > 1) {
            k = j;
        }
    }

    void step5()
    {
        j = k;
        if (at(k) == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k - 1))) {
                --k;
            }
        }
        if (at(k) == 'l' && double_consonant(k) && m() > 1) {
            --k;
        }
    }
};

}  // namespace

std::string porter_stem(std::string_view word)
{
    return PorterStemmer(word).run();
}

}  // namespace qexp

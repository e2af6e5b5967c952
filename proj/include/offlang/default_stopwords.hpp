// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <array>
#include <string_view>

namespace offlang {

// Mirrors data/arabic_stopwords.txt (BSD-licensed list from the
// "stop-words" package). A unit test keeps the two in sync.
inline constexpr std::array<std::string_view, 162> default_arabic_stopwords = {
    "فى",
    "في",
    "كل",
    "لم",
    "لن",
    "له",
    "من",
    "هو",
    "هي",
    "قوة",
    "كما",
    "لها",
    "منذ",
    "وقد",
    "ولا",
    "نفسه",
    "لقاء",
    "مقابل",
    "هناك",
    "وقال",
    "وكان",
    "نهاية",
    "وقالت",
    "وكانت",
    "للامم",
    "فيه",
    "كلم",
    "لكن",
    "وفي",
    "وقف",
    "ولم",
    "ومن",
    "وهو",
    "وهي",
    "يوم",
    "فيها",
    "منها",
    "مليار",
    "لوكالة",
    "يكون",
    "يمكن",
    "مليون",
    "حيث",
    "اكد",
    "الا",
    "اما",
    "امس",
    "السابق",
    "التى",
    "التي",
    "اكثر",
    "ايار",
    "ايضا",
    "ثلاثة",
    "الذاتي",
    "الاخيرة",
    "الثاني",
    "الثانية",
    "الذى",
    "الذي",
    "الان",
    "امام",
    "ايام",
    "خلال",
    "حوالى",
    "الذين",
    "الاول",
    "الاولى",
    "بين",
    "ذلك",
    "دون",
    "حول",
    "حين",
    "الف",
    "الى",
    "انه",
    "اول",
    "ضمن",
    "انها",
    "جميع",
    "الماضي",
    "الوقت",
    "المقبل",
    "اليوم",
    "ـ",
    "ف",
    "و",
    "و6",
    "قد",
    "لا",
    "ما",
    "مع",
    "مساء",
    "هذا",
    "واحد",
    "واضاف",
    "واضافت",
    "فان",
    "قبل",
    "قال",
    "كان",
    "لدى",
    "نحو",
    "هذه",
    "وان",
    "واكد",
    "كانت",
    "واوضح",
    "مايو",
    "ب",
    "ا",
    "أ",
    "،",
    "عشر",
    "عدد",
    "عدة",
    "عشرة",
    "عدم",
    "عام",
    "عاما",
    "عن",
    "عند",
    "عندما",
    "على",
    "عليه",
    "عليها",
    "زيارة",
    "سنة",
    "سنوات",
    "تم",
    "ضد",
    "بعد",
    "بعض",
    "اعادة",
    "اعلنت",
    "بسبب",
    "حتى",
    "اذا",
    "احد",
    "اثر",
    "برس",
    "باسم",
    "غدا",
    "شخصا",
    "صباح",
    "اطار",
    "اربعة",
    "اخرى",
    "بان",
    "اجل",
    "غير",
    "بشكل",
    "حاليا",
    "بن",
    "به",
    "ثم",
    "اف",
    "ان",
    "او",
    "اي",
    "بها",
    "صفر",
};

}  // namespace offlang

// Copyright 2026 The mtriage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string_view>
#include <vector>

// Hand-labelled rule fixtures: (rule, pair, source, translation, expected pass).
struct RuleFixture {
  std::string_view rule;
  std::string_view pair;
  std::string_view source;
  std::string_view translation;
  bool pass;
};

inline const std::vector<RuleFixture>& rule_fixtures() {
  static const std::vector<RuleFixture> fixtures = {
      {"emoji", "en-es", "I love it 😀", "Me encanta 😀", true},
      {"emoji", "en-es", "Party time 🎉🎉", "Hora de fiesta 🎉", true},
      {"emoji", "en-es", "No emoji here.", "Sin emoji aquí.", true},
      {"emoji", "en-es", "I love it 😀", "Me encanta", false},
      {"emoji", "en-es", "Great 👍", "Genial 👎", false},
      {"emoji", "en-es", "Hello.", "Hola 😀.", false},

      {"url", "en-es", "Visit https://example.com/a now.", "Visita https://example.com/a ahora.", true},
      {"url", "en-es", "See www.example.org.", "Ver www.example.org.", true},
      {"url", "en-es", "No links.", "Sin enlaces.", true},
      {"url", "en-es", "Visit https://example.com/a now.", "Visita https://ejemplo.com/a ahora.", false},
      {"url", "en-es", "See www.example.org/page.", "Ver la página.", false},
      {"url", "en-es", "Go to https://a.com and https://b.com.", "Ve a https://a.com.", false},

      {"number", "en-es", "I have 3 cats.", "Tengo 3 gatos.", true},
      {"number", "en-es", "It costs 1,500 dollars.", "Cuesta 1.500 dólares.", true},
      {"number", "en-es", "Room 12 on floor 4.", "Planta 4, habitación 12.", true},
      {"number", "en-es", "I have 3 cats.", "Tengo 4 gatos.", false},
      {"number", "en-es", "Call 555 1234.", "Llama al 555.", false},
      {"number", "en-es", "It costs 1,500 dollars.", "Cuesta 15 dólares.", false},

      {"roman-numeral", "en-es", "Chapter IV begins.", "Comienza el capítulo IV.", true},
      {"roman-numeral", "en-es", "Louis XIV was king.", "Luis XIV fue rey.", true},
      {"roman-numeral", "en-es", "No numerals here.", "Sin números aquí.", true},
      {"roman-numeral", "en-es", "Chapter IV begins.", "Comienza el capítulo 4.", false},
      {"roman-numeral", "en-es", "Louis XIV was king.", "Luis catorce fue rey.", false},
      {"roman-numeral", "en-es", "Part III and Part IV.", "Parte III y parte cuatro.", false},

      {"question", "en-es", "Where are you?", "¿Dónde estás?", true},
      {"question", "en-es", "He asked: \"Are you ok?\"", "Preguntó: «¿Estás bien?»", true},
      {"question", "en-es", "I am here.", "Estoy aquí.", true},
      {"question", "en-es", "Where are you?", "Dónde estás?", false},
      {"question", "en-es", "Where are you?", "¿Dónde estás.", false},
      {"question", "en-es", "Are you ok?", "Estás bien.", false},

      {"question", "en-zh", "Where are you?", "你在哪里？", true},
      {"question", "en-zh", "Are you ok?", "你还好吗？", true},
      {"question", "en-zh", "I am here.", "我在这里。", true},
      {"question", "en-zh", "Where are you?", "你在哪里。", false},
      {"question", "en-zh", "Are you ok?", "你还好吗", false},
      {"question", "en-zh", "Is it late?", "很晚了吗?", false},

      {"exclamation", "en-es", "Watch out!", "¡Cuidado!", true},
      {"exclamation", "en-es", "Happy birthday!", "¡Feliz cumpleaños!", true},
      {"exclamation", "en-es", "Fine.", "Bien.", true},
      {"exclamation", "en-es", "Watch out!", "Cuidado!", false},
      {"exclamation", "en-es", "Watch out!", "¡Cuidado.", false},
      {"exclamation", "en-es", "Happy birthday!", "Feliz cumpleaños.", false},

      {"ovs", "en-es", "This is great.", "Esto es genial.", true},
      {"ovs", "en-es", "This is shit.", "Esto es una mierda.", true},
      {"ovs", "en-es", "Damn, it broke.", "Se rompió.", true},
      {"ovs", "en-es", "This is great.", "Esto es una mierda.", false},
      {"ovs", "en-es", "Close the door.", "Cierra la puerta, joder.", false},
      {"ovs", "en-es", "Hello friend.", "Hola, hijo de puta.", false},

      {"comma", "en-es", "Yes, I agree.", "Sí, estoy de acuerdo.", true},
      {"comma", "en-es", "It costs 1,500.", "Cuesta 1.500.", true},
      {"comma", "en-es", "No commas here.", "Sin comas aquí.", true},
      {"comma", "en-es", "Yes, I agree.", "Sí estoy de acuerdo.", false},
      {"comma", "en-es", "Red, green and blue.", "Rojo, verde, y azul.", false},
      {"comma", "en-es", "Hello.", "Hola, amigo.", false},

      {"period", "en-es", "I am here.", "Estoy aquí.", true},
      {"period", "en-es", "Go. Now.", "Ve. Ahora.", true},
      {"period", "en-es", "See https://example.com/a.b today", "Mira https://example.com/a.b hoy", true},
      {"period", "en-es", "I am here.", "Estoy aquí", false},
      {"period", "en-es", "Go. Now.", "Ve ahora.", false},
      {"period", "en-es", "Version 2", "Versión 2.", false},
  };
  return fixtures;
}

#pragma once

#include <cstdlib>
#include <map>
#include <string>
#include <string_view>

#include "sonowork/error.hpp"

namespace sonowork::i18n {

enum class Lang { En, Es };

/// SONOWORK_LANG=es selects Spanish; anything else is English.
inline Lang lang_from_env() {
  const char* v = std::getenv("SONOWORK_LANG");
  return v && std::string_view(v).starts_with("es") ? Lang::Es : Lang::En;
}

struct Entry {
  const char* en;
  const char* es;
};

inline const std::map<std::string, Entry, std::less<>>& catalog() {
  static const std::map<std::string, Entry, std::less<>> table = {
      {"error", {"error", "error"}},
      {"row", {"row", "fila"}},
      {"column", {"column", "columna"}},
      {"step", {"step", "paso"}},
      {"points", {"points", "puntos"}},
      {"events", {"events", "eventos"}},
      {"duration", {"duration", "duración"}},
      {"freq_range", {"freq", "frec"}},
      {"wrote", {"wrote", "escrito"}},
      {"rows", {"rows", "filas"}},
      {"bad_json", {"--ops is not valid JSON", "--ops no es JSON válido"}},
      {"io_read", {"cannot read file", "no se puede leer el archivo"}},
      {"io_write", {"cannot write file", "no se puede escribir el archivo"}},
      {"listening", {"listening on", "escuchando en"}},
      {"Correct", {"Correct", "Correcto"}},
      {"Incorrect", {"Incorrect", "Incorrecto"}},
      // error kinds
      {"EmptyInput", {"the input has no data rows", "la entrada no tiene filas de datos"}},
      {"RaggedRows", {"rows have inconsistent column counts", "las filas tienen distinta cantidad de columnas"}},
      {"NonNumericCell", {"non-numeric value in the data", "valor no numérico en los datos"}},
      {"BadHeader", {"invalid header row", "fila de encabezado inválida"}},
      {"NegativeWeight", {"event weight is negative", "el peso del evento es negativo"}},
      {"UnknownColumn", {"unknown column", "columna desconocida"}},
      {"EmptyTable", {"the table is empty", "la tabla está vacía"}},
      {"NonFiniteAbscissa", {"x column has missing or infinite values", "la columna x tiene valores faltantes o infinitos"}},
      {"AllNaN", {"the series has no finite values", "la serie no tiene valores finitos"}},
      {"NotNormalized", {"values must be normalized to [0, 1]", "los valores deben estar normalizados en [0, 1]"}},
      {"BadWindow", {"invalid smoothing window", "ventana de suavizado inválida"}},
      {"BadRange", {"invalid cut range", "rango de corte inválido"}},
      {"BadSpec", {"invalid transform list", "lista de transformaciones inválida"}},
      {"BadConfig", {"invalid sound settings", "configuración de sonido inválida"}},
      {"OutOfRange", {"value outside [0, 1]", "valor fuera de [0, 1]"}},
      {"BadFrequency", {"invalid frequency", "frecuencia inválida"}},
      {"BadDuration", {"invalid duration", "duración inválida"}},
      {"EmptySeries", {"the series is empty", "la serie está vacía"}},
      {"BadTimeline", {"invalid timeline", "línea de tiempo inválida"}},
      {"TooShort", {"segment too short", "segmento demasiado corto"}},
      {"BadSize", {"invalid plot size", "tamaño de gráfico inválido"}},
      {"BadBlock", {"invalid training block", "bloque de entrenamiento inválido"}},
      {"BadEvent", {"invalid session event", "evento de sesión inválido"}},
      {"IllegalEvent", {"event not allowed now", "evento no permitido en este momento"}},
      {"SkipDisabled", {"skipping the introduction is disabled", "omitir la introducción está deshabilitado"}},
      {"ReplayDisabled", {"replay is disabled", "la repetición está deshabilitada"}},
      {"NotCompleted", {"the session is not completed", "la sesión no está completa"}},
      {"EmptySession", {"the session has no responses", "la sesión no tiene respuestas"}},
  };
  return table;
}

inline std::string tr(Lang lang, std::string_view key) {
  const auto& c = catalog();
  const auto it = c.find(key);
  if (it == c.end()) return std::string(key);
  return lang == Lang::Es ? it->second.es : it->second.en;
}

/// One-line, human-readable rendering of an Error for standard error.
inline std::string describe(const Error& e, Lang lang) {
  std::string out = tr(lang, "error") + " [" + std::string(e.code()) + "]: ";
  if (lang == Lang::En) {
    out += e.what();
  } else {
    out += tr(lang, e.code());
    if (e.step) out += "; " + tr(lang, "step") + " " + std::to_string(*e.step);
    if (e.row) out += "; " + tr(lang, "row") + " " + std::to_string(*e.row);
    if (e.column) out += "; " + tr(lang, "column") + " '" + *e.column + "'";
  }
  return out;
}

}  // namespace sonowork::i18n

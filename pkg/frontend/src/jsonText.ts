/**
 * Extracts the exact number literals from a raw JSON document, keyed by
 * path (object keys and array indices joined with "/").
 *
 * The console displays pipeline quantities verbatim from the wire: a
 * parsed double re-formatted by the client could differ from the
 * server's 17-significant-digit rendering, so tooltips look up the
 * original token here instead of formatting numbers themselves.
 */

const WS = new Set([" ", "\t", "\n", "\r"]);
const NUM_START = new Set(["-", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]);
const NUM_BODY = new Set([
  "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "+", "-", ".", "e", "E",
]);

export function numberLiterals(text: string): Map<string, string> {
  const out = new Map<string, string>();
  let pos = 0;

  function skipWs(): void {
    while (pos < text.length && WS.has(text[pos])) pos++;
  }

  function parseString(): string {
    // pos sits on the opening quote
    pos++;
    let value = "";
    while (pos < text.length) {
      const c = text[pos];
      if (c === "\\") {
        const esc = text[pos + 1];
        if (esc === "u") {
          value += String.fromCharCode(parseInt(text.slice(pos + 2, pos + 6), 16));
          pos += 6;
        } else {
          const simple: Record<string, string> = {
            '"': '"', "\\": "\\", "/": "/", b: "\b", f: "\f", n: "\n", r: "\r", t: "\t",
          };
          value += simple[esc] ?? esc;
          pos += 2;
        }
      } else if (c === '"') {
        pos++;
        return value;
      } else {
        value += c;
        pos++;
      }
    }
    throw new Error("unterminated string");
  }

  function parseValue(path: string): void {
    skipWs();
    const c = text[pos];
    if (c === "{") {
      pos++;
      skipWs();
      if (text[pos] === "}") {
        pos++;
        return;
      }
      for (;;) {
        skipWs();
        const key = parseString();
        skipWs();
        if (text[pos] !== ":") throw new Error(`expected ':' at ${pos}`);
        pos++;
        parseValue(path === "" ? key : `${path}/${key}`);
        skipWs();
        if (text[pos] === ",") {
          pos++;
          continue;
        }
        if (text[pos] === "}") {
          pos++;
          return;
        }
        throw new Error(`expected ',' or '}' at ${pos}`);
      }
    } else if (c === "[") {
      pos++;
      skipWs();
      if (text[pos] === "]") {
        pos++;
        return;
      }
      let index = 0;
      for (;;) {
        parseValue(path === "" ? String(index) : `${path}/${index}`);
        index++;
        skipWs();
        if (text[pos] === ",") {
          pos++;
          continue;
        }
        if (text[pos] === "]") {
          pos++;
          return;
        }
        throw new Error(`expected ',' or ']' at ${pos}`);
      }
    } else if (c === '"') {
      parseString();
    } else if (NUM_START.has(c)) {
      const start = pos;
      while (pos < text.length && NUM_BODY.has(text[pos])) pos++;
      out.set(path, text.slice(start, pos));
    } else if (text.startsWith("true", pos)) {
      pos += 4;
    } else if (text.startsWith("false", pos)) {
      pos += 5;
    } else if (text.startsWith("null", pos)) {
      pos += 4;
    } else {
      throw new Error(`unexpected character ${c} at ${pos}`);
    }
  }

  parseValue("");
  return out;
}

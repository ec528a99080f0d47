/** Client-side CSV header validation.
 *
 * Upload widgets must reject files whose header row is not exactly the
 * required column list, before any network call is made.
 */

export const TRAIN_HEADER = [
  "id",
  "question_id",
  "question_text",
  "reference_answer",
  "student_answer",
  "score",
] as const;

export const TEST_HEADER = TRAIN_HEADER.slice(0, 5);

export type CsvKind = "train" | "test";

export interface HeaderCheck {
  ok: boolean;
  error?: string;
}

/** Split one CSV record honoring double-quote quoting. */
export function splitCsvLine(line: string): string[] {
  const fields: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(field);
      field = "";
    } else {
      field += ch;
    }
  }
  fields.push(field);
  return fields;
}

export function validateCsvHeader(text: string, kind: CsvKind): HeaderCheck {
  const firstLine = text.split(/\r?\n/, 1)[0] ?? "";
  if (!firstLine.trim()) {
    return { ok: false, error: "the file is empty (no header row)" };
  }
  const expected = kind === "train" ? TRAIN_HEADER : TEST_HEADER;
  const got = splitCsvLine(firstLine).map((f) => f.trim());
  if (got.length !== expected.length || expected.some((col, i) => got[i] !== col)) {
    return {
      ok: false,
      error:
        `${kind} CSV must start with the exact header ` +
        `"${expected.join(",")}" but this file has "${got.join(",")}"`,
    };
  }
  return { ok: true };
}

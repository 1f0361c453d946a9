/** Reader for the line-delimited corpus files produced by the prep step. */

import { promises as fs } from "node:fs";

export interface CorpusDocument {
  id: string;
  lang: string;
  text: string;
}

export async function readCorpusJsonl(path: string): Promise<CorpusDocument[]> {
  const raw = await fs.readFile(path, "utf-8");
  const docs: CorpusDocument[] = [];
  const seen = new Set<string>();
  for (const [lineNo, line] of raw.split("\n").entries()) {
    if (!line.trim()) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${lineNo + 1}: invalid JSON (${(err as Error).message})`);
    }
    const doc = obj as Partial<CorpusDocument>;
    if (typeof doc.id !== "string" || typeof doc.lang !== "string" || typeof doc.text !== "string") {
      throw new Error(`${path}:${lineNo + 1}: expected {id, lang, text} strings`);
    }
    if (seen.has(doc.id)) {
      throw new Error(`${path}:${lineNo + 1}: duplicate document id ${doc.id}`);
    }
    seen.add(doc.id);
    docs.push({ id: doc.id, lang: doc.lang, text: doc.text });
  }
  return docs;
}

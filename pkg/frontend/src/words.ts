// Space-delimited word emission: a token leaves the input box the moment
// it is completed by whitespace (or explicitly flushed with Enter).

export interface Extraction {
  words: string[];
  rest: string;
}

export function extractCompletedWords(buffer: string): Extraction {
  const endsOpen = !/\s$/.test(buffer);
  const tokens = buffer.split(/\s+/).filter((w) => w.length > 0);
  if (tokens.length === 0) return { words: [], rest: "" };
  if (endsOpen) {
    const rest = tokens[tokens.length - 1];
    return { words: tokens.slice(0, -1), rest };
  }
  return { words: tokens, rest: "" };
}

export class WordEmitter {
  private pending = "";

  constructor(private readonly send: (word: string) => void) {}

  // feed the full current value of the input box; returns the residue the
  // box should display (the incomplete token)
  input(value: string): string {
    const { words, rest } = extractCompletedWords(value);
    for (const word of words) this.send(word);
    this.pending = rest;
    return this.pending;
  }

  // Enter: flush the incomplete token too; empty submits emit nothing
  flush(value: string): string {
    const { words, rest } = extractCompletedWords(value);
    for (const word of words) this.send(word);
    if (rest.length > 0) this.send(rest);
    this.pending = "";
    return "";
  }
}

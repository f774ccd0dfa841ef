import { describe, expect, it } from "vitest";

import { extractCompletedWords, WordEmitter } from "../src/words.js";

describe("extractCompletedWords", () => {
  it("emits nothing while a token is still open", () => {
    expect(extractCompletedWords("gra")).toEqual({ words: [], rest: "gra" });
  });

  it("completes a token on trailing space", () => {
    expect(extractCompletedWords("grab ")).toEqual({ words: ["grab"], rest: "" });
  });

  it("handles several completed tokens plus an open one", () => {
    expect(extractCompletedWords("grab the mu")).toEqual({
      words: ["grab", "the"],
      rest: "mu",
    });
  });

  it("collapses repeated whitespace", () => {
    expect(extractCompletedWords("grab   the  ")).toEqual({
      words: ["grab", "the"],
      rest: "",
    });
  });

  it("empty input emits nothing", () => {
    expect(extractCompletedWords("")).toEqual({ words: [], rest: "" });
    expect(extractCompletedWords("   ")).toEqual({ words: [], rest: "" });
  });
});

describe("WordEmitter", () => {
  it("sends words in typing order as they complete", () => {
    const sent: string[] = [];
    const emitter = new WordEmitter((w) => sent.push(w));
    let box = "";
    for (const ch of "grab the mug ") {
      box += ch;
      box = emitter.input(box);
    }
    expect(sent).toEqual(["grab", "the", "mug"]);
    expect(box).toBe("");
  });

  it("enter flushes the incomplete token", () => {
    const sent: string[] = [];
    const emitter = new WordEmitter((w) => sent.push(w));
    let box = emitter.input("from the to");
    expect(sent).toEqual(["from", "the"]);
    expect(box).toBe("to");
    box = emitter.flush(box + "p");
    expect(box).toBe("");
    expect(sent).toEqual(["from", "the", "top"]);
  });

  it("empty submit emits no frame", () => {
    const sent: string[] = [];
    const emitter = new WordEmitter((w) => sent.push(w));
    expect(emitter.flush("")).toBe("");
    expect(emitter.flush("   ")).toBe("");
    expect(sent).toEqual([]);
  });
});

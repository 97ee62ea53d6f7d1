import { describe, expect, it } from "vitest";

import { SliderScheduler } from "../src/scheduler.js";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

describe("slider scheduler", () => {
  it("rejects a debounce above the 50 ms budget", () => {
    expect(() => new SliderScheduler(80, async () => 0, () => {})).toThrow();
  });

  it("fires only the trailing value of a rapid drag", async () => {
    const executed: number[] = [];
    const applied: number[] = [];
    const scheduler = new SliderScheduler<number, number>(
      10,
      async (v) => {
        executed.push(v);
        return v;
      },
      (v) => applied.push(v),
    );
    for (let v = 0; v < 20; v++) scheduler.schedule(v);
    await scheduler.idle();
    expect(executed).toEqual([19]);
    expect(applied).toEqual([19]);
  });

  it("discards a stale response that resolves after a newer request", async () => {
    const applied: string[] = [];
    let release: (() => void) | null = null;
    const scheduler = new SliderScheduler<string, string>(
      1,
      (v) =>
        new Promise((resolve) => {
          if (v === "slow") release = () => resolve("slow");
          else resolve(v);
        }),
      (v) => applied.push(v),
    );

    scheduler.schedule("slow");
    await sleep(10); // slow request is now in flight
    scheduler.schedule("fast");
    await sleep(10); // fast is queued behind the in-flight slow
    release!();
    await scheduler.idle();
    expect(applied).toEqual(["fast"]);
    expect(scheduler.discarded).toBe(1);
  });

  it("keeps at most one request in flight", async () => {
    let inFlight = 0;
    let peak = 0;
    const scheduler = new SliderScheduler<number, number>(
      1,
      async (v) => {
        inFlight += 1;
        peak = Math.max(peak, inFlight);
        await sleep(5);
        inFlight -= 1;
        return v;
      },
      () => {},
    );
    scheduler.schedule(1);
    await sleep(8);
    scheduler.schedule(2);
    await sleep(8);
    scheduler.schedule(3);
    await scheduler.idle();
    expect(peak).toBe(1);
  });

  it("routes failures to the error handler and keeps going", async () => {
    const errors: unknown[] = [];
    const applied: number[] = [];
    let shouldFail = true;
    const scheduler = new SliderScheduler<number, number>(
      1,
      async (v) => {
        if (shouldFail) throw new Error("network down");
        return v;
      },
      (v) => applied.push(v),
      (e) => errors.push(e),
    );
    scheduler.schedule(1);
    await scheduler.idle();
    shouldFail = false;
    scheduler.schedule(2);
    await scheduler.idle();
    expect(errors.length).toBe(1);
    expect(applied).toEqual([2]); // sliders stay live after a failure
  });
});

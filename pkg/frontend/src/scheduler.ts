/** Debounced latest-wins request scheduling for slider interaction.
 *
 *  Guarantees: at most one request in flight; a response is applied only if
 *  no newer request has been issued (stale responses are discarded); after
 *  interaction stops, the final slider value is always the one displayed.
 */

export class SliderScheduler<A, R> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private issued = 0;
  private inFlight = false;
  private queued: A | null = null;
  discarded = 0; // stale responses dropped, exposed for diagnostics

  constructor(
    private readonly debounceMs: number,
    private readonly execute: (arg: A) => Promise<R>,
    private readonly apply: (result: R, arg: A) => void,
    private readonly onError: (error: unknown) => void = () => {},
  ) {
    if (debounceMs > 50) throw new Error("slider debounce must stay within 50 ms");
  }

  /** Called on every slider movement; only the trailing value fires. */
  schedule(arg: A): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.dispatch(arg);
    }, this.debounceMs);
  }

  /** Resolves once the scheduler has no pending or in-flight work. */
  async idle(pollMs = 5): Promise<void> {
    while (this.timer !== null || this.inFlight || this.queued !== null) {
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  private dispatch(arg: A): void {
    if (this.inFlight) {
      this.queued = arg; // newest wins; older queued value is replaced
      return;
    }
    void this.fire(arg);
  }

  private async fire(arg: A): Promise<void> {
    const id = ++this.issued;
    this.inFlight = true;
    try {
      const result = await this.execute(arg);
      // stale if a newer request was issued meanwhile, or a newer slider
      // value is already queued behind this one
      if (id === this.issued && this.queued === null) {
        this.apply(result, arg);
      } else {
        this.discarded += 1;
      }
    } catch (error) {
      this.onError(error);
    } finally {
      this.inFlight = false;
      if (this.queued !== null) {
        const next = this.queued;
        this.queued = null;
        void this.fire(next);
      }
    }
  }
}

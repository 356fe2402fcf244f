/**
 * Hands out one token per query a panel starts; only the newest token is
 * current. A response arriving for a superseded token must be thrown
 * away, never rendered, so a slow early response cannot overwrite the
 * result of a later facet change.
 */
export class RequestGate {
    private sequence = 0;

    begin(): number {
        this.sequence += 1;
        return this.sequence;
    }

    isCurrent(token: number): boolean {
        return token === this.sequence;
    }
}

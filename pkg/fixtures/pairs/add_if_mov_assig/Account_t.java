public class Account {
    private double balance;

    public void withdraw(double amount) {
        double fee = amount * 0.01;
        if (amount + fee <= balance) {
            balance = balance - amount - fee;
        }
        log(amount);
    }
}
